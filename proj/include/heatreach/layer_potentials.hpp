#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "heatreach/geometry.hpp"
#include "heatreach/quadrature.hpp"
#include "heatreach/special_functions.hpp"
#include "heatreach/types.hpp"

namespace heatreach {

struct BoundaryNode {
    RealVector point;
    double weight = 0.0;
    RealVector normal;  // outward unit normal
};

/// Lateral boundary (0, T) x dOmega split into nt uniform time slabs and a
/// boundary quadrature.
struct SpaceTimeGrid {
    DomainSpec domain;
    double T = 1.0;
    std::size_t nt = 1;
    std::vector<BoundaryNode> nodes;

    int dim() const { return dimension(domain); }
    double dt() const { return T / static_cast<double>(nt); }
    double slab_start(std::size_t i) const { return dt() * static_cast<double>(i); }
    double midpoint(std::size_t i) const { return dt() * (static_cast<double>(i) + 0.5); }
    std::size_t node_count() const { return nodes.size(); }
};

/// Builds the grid. `boundary_resolution` is the node count on a disk and the
/// Gauss-Legendre order per edge on a polygon; it is ignored for intervals.
inline SpaceTimeGrid make_space_time_grid(const DomainSpec& domain, double T, std::size_t nt,
                                          std::size_t boundary_resolution = 64)
{
    validate(domain);
    if (!(T > 0.0)) throw std::invalid_argument("SpaceTimeGrid: T must be positive");
    if (nt < 1) throw std::invalid_argument("SpaceTimeGrid: nt must be >= 1");
    SpaceTimeGrid grid{domain, T, nt, {}};
    const int d = dimension(domain);
    if (d == 1) {
        double a, b;
        if (const auto* iv = std::get_if<Interval>(&domain)) {
            a = iv->a;
            b = iv->b;
        } else {
            const auto& ball = std::get<Ball>(domain);
            a = ball.center[0] - ball.radius;
            b = ball.center[0] + ball.radius;
        }
        grid.nodes.push_back({{a}, 1.0, {-1.0}});
        grid.nodes.push_back({{b}, 1.0, {1.0}});
    } else if (d == 2) {
        if (const auto* ball = std::get_if<Ball>(&domain)) {
            if (boundary_resolution < 8) throw std::invalid_argument("SpaceTimeGrid: need >= 8 disk nodes");
            const double w = 2.0 * kPi * ball->radius / static_cast<double>(boundary_resolution);
            for (std::size_t j = 0; j < boundary_resolution; ++j) {
                const double th = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(boundary_resolution);
                const double c = std::cos(th), s = std::sin(th);
                grid.nodes.push_back({{ball->center[0] + ball->radius * c, ball->center[1] + ball->radius * s}, w, {c, s}});
            }
        } else {
            const auto& v = std::get<Polygon>(domain).vertices;
            const auto& g = gauss_legendre(std::max<std::size_t>(2, boundary_resolution));
            for (std::size_t e = 0; e < v.size(); ++e) {
                const auto& p = v[e];
                const auto& q = v[(e + 1) % v.size()];
                const double ex = q[0] - p[0], ey = q[1] - p[1];
                const double len = std::hypot(ex, ey);
                for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                    const double s = 0.5 * (g.nodes[k] + 1.0);
                    grid.nodes.push_back({{p[0] + s * ex, p[1] + s * ey}, 0.5 * len * g.weights[k], {ey / len, -ex / len}});
                }
            }
        }
    } else {
        throw std::invalid_argument("SpaceTimeGrid: only d = 1, 2 are supported");
    }
    return grid;
}

/// Values on the space-time grid, indexed by (time slab, boundary node).
/// Used both for densities q and for boundary data g = Vq.
struct BoundaryField {
    SpaceTimeGrid grid;
    std::vector<Complex> values;

    explicit BoundaryField(SpaceTimeGrid g) : grid(std::move(g)), values(grid.nt * grid.node_count()) {}

    Complex& at(std::size_t i, std::size_t j) { return values[i * grid.node_count() + j]; }
    const Complex& at(std::size_t i, std::size_t j) const { return values[i * grid.node_count() + j]; }
};

using BoundaryDensity = BoundaryField;
using BoundaryData = BoundaryField;

/// Samples f(t, node) at the slab midpoints.
inline BoundaryField sample_on_grid(const SpaceTimeGrid& grid,
                                    const std::function<Complex(double, const BoundaryNode&)>& f)
{
    BoundaryField field(grid);
    for (std::size_t i = 0; i < grid.nt; ++i)
        for (std::size_t j = 0; j < grid.node_count(); ++j) field.at(i, j) = f(grid.midpoint(i), grid.nodes[j]);
    return field;
}

namespace detail {

// F(tau) = int_0^tau (4 pi s)^(-1/2) exp(-r2 / 4s) ds, with Re r2 >= 0.
inline Complex heat_time_primitive_1d(Complex r2, double tau)
{
    if (tau <= 0.0) return {0.0, 0.0};
    if (r2 == Complex{0.0, 0.0}) return {std::sqrt(tau / kPi), 0.0};
    if (r2.imag() == 0.0) {
        const double r = std::sqrt(r2.real());
        return {std::sqrt(tau / kPi) * std::exp(-r2.real() / (4.0 * tau)) - 0.5 * r * std::erfc(r / (2.0 * std::sqrt(tau))), 0.0};
    }
    const Complex rho = std::sqrt(r2);
    const double st = std::sqrt(tau);
    const Complex zeta = rho / (2.0 * st);
    return st * std::exp(-zeta * zeta) * (1.0 / std::sqrt(kPi) - zeta * erfcx(zeta));
}

// int_{tau0}^{tau1} (4 pi s)^(-d/2) exp(-r2 / 4s) ds, d = 1, 2 (r2 != 0 for d = 2)
inline Complex slab_kernel(int d, Complex r2, double tau0, double tau1)
{
    if (tau1 <= tau0) return {0.0, 0.0};
    if (d == 1) return heat_time_primitive_1d(r2, tau1) - heat_time_primitive_1d(r2, tau0);
    const Complex upper = exp_integral_e1(r2 / (4.0 * tau1));
    const Complex lower = tau0 > 0.0 ? exp_integral_e1(r2 / (4.0 * tau0)) : Complex{0.0, 0.0};
    return (upper - lower) / (4.0 * kPi);
}

// Self-panel entry for d = 2: the density is constant on a straight panel of
// length w centred at the collocation node. The time integral of
// (4 pi tau)^(-1/2) erf(w / 4 sqrt(tau)) is taken in sigma = sqrt(tau).
inline double self_panel_2d(double w, double tau0, double tau1)
{
    if (tau1 <= tau0) return 0.0;
    const double s0 = std::sqrt(tau0), s1 = std::sqrt(tau1);
    const auto& g = gauss_legendre(32);
    double sum = 0.0;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        const double sigma = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * g.nodes[k];
        sum += g.weights[k] * std::erf(w / (4.0 * sigma));
    }
    return 0.5 * (s1 - s0) * sum / std::sqrt(kPi);
}

inline double node_r2(const RealVector& a, const RealVector& b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

inline void require_time(const SpaceTimeGrid& grid, double t)
{
    if (!(t > 0.0) || t > grid.T * (1.0 + 1e-14)) throw std::invalid_argument("layer potential: t outside (0, T]");
}

}  // namespace detail

/// Discretized boundary operator V with piecewise-constant densities per
/// time slab, collocated at slab midpoints. The kernel is Toeplitz in time,
/// so only nt node-by-node blocks are stored.
class VolterraOperator {
public:
    explicit VolterraOperator(SpaceTimeGrid grid) : grid_(std::move(grid))
    {
        const std::size_t n = grid_.node_count();
        const double dt = grid_.dt();
        const int d = grid_.dim();
        blocks_.reserve(grid_.nt);
        for (std::size_t lag = 0; lag < grid_.nt; ++lag) {
            const double tau0 = lag == 0 ? 0.0 : (static_cast<double>(lag) - 0.5) * dt;
            const double tau1 = (static_cast<double>(lag) + 0.5) * dt;
            Eigen::MatrixXd block(n, n);
            for (std::size_t k = 0; k < n; ++k) {
                for (std::size_t j = 0; j < n; ++j) {
                    const auto& nj = grid_.nodes[j];
                    if (j == k && d == 2) {
                        block(k, j) = detail::self_panel_2d(nj.weight, tau0, tau1);
                    } else {
                        const double r2 = detail::node_r2(grid_.nodes[k].point, nj.point);
                        block(k, j) = nj.weight * detail::slab_kernel(d, r2, tau0, tau1).real();
                    }
                }
            }
            blocks_.push_back(std::move(block));
        }

        Eigen::MatrixXd step = blocks_[0];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(step);
        const auto& sv = svd.singularValues();
        condition_ = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
        if (condition_ > 1e12) {
            regularization_ = 1e-10 * sv(0);
            step += regularization_ * Eigen::MatrixXd::Identity(n, n);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd2(step);
            const auto& sv2 = svd2.singularValues();
            if (!(sv2(sv2.size() - 1) > 0.0) || sv2(0) / sv2(sv2.size() - 1) > 1e15)
                throw GuardError("volterra_solve: step matrix singular after regularization");
        }
        step_lu_ = step.partialPivLu();
    }

    const SpaceTimeGrid& grid() const { return grid_; }
    double step_condition() const { return condition_; }
    bool regularized() const { return regularization_ > 0.0; }
    double regularization() const { return regularization_; }
    const Eigen::MatrixXd& block(std::size_t lag) const { return blocks_.at(lag); }

    /// g = V q at slab midpoints and boundary nodes.
    BoundaryData apply(const BoundaryDensity& q) const
    {
        check(q);
        const std::size_t n = grid_.node_count();
        BoundaryData g(grid_);
        for (std::size_t i = 0; i < grid_.nt; ++i) {
            Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(n);
            for (std::size_t m = 0; m <= i; ++m) acc += blocks_[i - m].cast<Complex>() * slab(q, m);
            for (std::size_t k = 0; k < n; ++k) g.at(i, k) = acc(k);
        }
        return g;
    }

    /// Forward time marching on the block lower-triangular system.
    BoundaryDensity solve(const BoundaryData& g) const
    {
        check(g);
        const std::size_t n = grid_.node_count();
        BoundaryDensity q(grid_);
        std::vector<Eigen::VectorXcd> done;
        done.reserve(grid_.nt);
        for (std::size_t i = 0; i < grid_.nt; ++i) {
            Eigen::VectorXcd rhs = slab(g, i);
            for (std::size_t m = 0; m < i; ++m) rhs -= blocks_[i - m].cast<Complex>() * done[m];
            Eigen::VectorXd re = step_lu_.solve(Eigen::VectorXd(rhs.real()));
            Eigen::VectorXd im = step_lu_.solve(Eigen::VectorXd(rhs.imag()));
            Eigen::VectorXcd sol(n);
            for (std::size_t k = 0; k < n; ++k) {
                sol(k) = Complex(re(k), im(k));
                q.at(i, k) = sol(k);
            }
            done.push_back(std::move(sol));
        }
        return q;
    }

private:
    void check(const BoundaryField& f) const
    {
        if (f.grid.nt != grid_.nt || f.grid.node_count() != grid_.node_count() || f.grid.T != grid_.T)
            throw std::invalid_argument("VolterraOperator: field lives on a different grid");
    }

    Eigen::VectorXcd slab(const BoundaryField& f, std::size_t i) const
    {
        const std::size_t n = grid_.node_count();
        Eigen::VectorXcd v(n);
        for (std::size_t k = 0; k < n; ++k) v(k) = f.at(i, k);
        return v;
    }

    SpaceTimeGrid grid_;
    std::vector<Eigen::MatrixXd> blocks_;
    Eigen::PartialPivLU<Eigen::MatrixXd> step_lu_;
    double condition_ = 0.0;
    double regularization_ = 0.0;
};

inline BoundaryData boundary_operator_apply(const BoundaryDensity& q)
{
    return VolterraOperator(q.grid).apply(q);
}

inline BoundaryDensity volterra_solve(const BoundaryData& g)
{
    return VolterraOperator(g.grid).solve(g);
}

/// Single layer potential at (t, z) for real z in the closed domain or z in
/// the closed egg domain, using exact slab integrals of the kernel in time.
inline Complex single_layer_eval(const BoundaryDensity& q, double t, const ComplexPoint& z)
{
    const auto& grid = q.grid;
    detail::require_time(grid, t);
    if (z.dim() != static_cast<std::size_t>(grid.dim())) throw std::invalid_argument("single_layer_eval: dimension mismatch");
    if (z.is_real()) {
        if (distance_to_boundary(grid.domain, z.re).exterior)
            throw std::invalid_argument("single_layer_eval: real point outside the closed domain");
    } else if (!egg_contains(grid.domain, z, EggMode::closed)) {
        throw std::invalid_argument("single_layer_eval: complex point outside the closed egg domain");
    }
    const int d = grid.dim();
    std::vector<Complex> r2(grid.node_count());
    for (std::size_t j = 0; j < grid.node_count(); ++j) r2[j] = shifted_square(z, grid.nodes[j].point);

    Complex sum{0.0, 0.0};
    for (std::size_t m = 0; m < grid.nt; ++m) {
        const double s0 = grid.slab_start(m);
        if (s0 >= t) break;
        const double s1 = std::min(grid.slab_start(m + 1), t);
        const double tau0 = t - s1, tau1 = t - s0;
        for (std::size_t j = 0; j < grid.node_count(); ++j) {
            const Complex qv = q.at(m, j);
            if (qv == Complex{0.0, 0.0}) continue;
            sum += grid.nodes[j].weight * qv * detail::slab_kernel(d, r2[j], tau0, tau1);
        }
    }
    return sum;
}

/// Double layer potential with kernel d/dn(y) G(t - s, x - y), for x strictly
/// inside the domain.
inline Complex double_layer_eval(const BoundaryDensity& q, double t, std::span<const double> x)
{
    const auto& grid = q.grid;
    detail::require_time(grid, t);
    const auto bd = distance_to_boundary(grid.domain, x);
    if (bd.exterior || !(bd.distance > 0.0))
        throw std::invalid_argument("double_layer_eval: x must lie strictly inside the domain");
    const int d = grid.dim();
    Complex sum{0.0, 0.0};
    for (std::size_t j = 0; j < grid.node_count(); ++j) {
        const auto& node = grid.nodes[j];
        double rho = 0.0, r2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double diff = x[k] - node.point[k];
            rho += node.normal[k] * diff;
            r2 += diff * diff;
        }
        // time primitive of (n.(x-y) / 2 tau) G(tau, x - y)
        auto primitive = [&](double tau) -> double {
            if (tau <= 0.0) return 0.0;
            if (d == 1) return rho / (2.0 * std::sqrt(r2)) * std::erfc(std::sqrt(r2) / (2.0 * std::sqrt(tau)));
            return rho / (2.0 * kPi * r2) * std::exp(-r2 / (4.0 * tau));
        };
        for (std::size_t m = 0; m < grid.nt; ++m) {
            const double s0 = grid.slab_start(m);
            if (s0 >= t) break;
            const double s1 = std::min(grid.slab_start(m + 1), t);
            sum += node.weight * q.at(m, j) * (primitive(t - s0) - primitive(t - s1));
        }
    }
    return sum;
}

/// u = S(V^{-1} g) evaluated at every (point, time) pair; the result is
/// indexed [point * times.size() + time].
inline std::vector<Complex> dirichlet_solve_bie(const BoundaryData& g, const std::vector<ComplexPoint>& points,
                                                const std::vector<double>& times)
{
    const BoundaryDensity q = volterra_solve(g);
    std::vector<Complex> out(points.size() * times.size());
    for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t k = 0; k < times.size(); ++k) out[p * times.size() + k] = single_layer_eval(q, times[k], points[p]);
    return out;
}

}  // namespace heatreach
