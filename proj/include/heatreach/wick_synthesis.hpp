#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "heatreach/geometry.hpp"
#include "heatreach/parallel.hpp"
#include "heatreach/quadrature.hpp"
#include "heatreach/reference_solver.hpp"
#include "heatreach/special_functions.hpp"
#include "heatreach/types.hpp"

namespace heatreach {

// ---------------------------------------------------------------- targets

struct Monomial {
    Complex coefficient;
    std::vector<int> powers;
};

/// Sum of monomials c z_1^{p_1} ... z_d^{p_d}.
struct PolynomialFamily {
    std::vector<Monomial> terms;
    int dim = 1;
};

struct LorentzianFamily {
    double alpha = 1.0;
    int dim = 1;
};

/// 1 / (z - p0) in one dimension.
struct PoleQuotientFamily {
    Complex pole;
};

/// (4 pi)^(-1/2) E1(((z - x0)^2 + a) / 4) in one dimension (principal branch).
struct SingularE1Family {
    double x0 = 1.2;
    Complex a{0.15, 1.12};
};

using TargetFamily = std::variant<PolynomialFamily, LorentzianFamily, PoleQuotientFamily, SingularE1Family>;

namespace detail {

// min over s >= 0 of |Re z| + |Im z| for z = x0 +- sqrt(-a - s), the image of
// the principal branch cut of E1 in the z plane.
inline double singular_e1_radius(double x0, Complex a)
{
    auto l1 = [&](double s) {
        const Complex r = std::sqrt(-a - s);
        double v = INFINITY;
        for (const Complex z : {x0 + r, x0 - r}) v = std::min(v, std::abs(z.real()) + std::abs(z.imag()));
        return v;
    };
    // coarse scan on s = 0.01 k^2, then golden refinement near the best sample
    double arg = 0.0, best = l1(0.0);
    for (int k = 1; k <= 2000; ++k) {
        const double s = 0.01 * k * k;
        if (const double v = l1(s); v < best) best = v, arg = s;
    }
    double lo = std::max(0.0, arg - 0.02 * std::sqrt(arg + 1.0) * 10.0), hi = arg + 0.2 * std::sqrt(arg + 1.0);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
        const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
        if (l1(m1) < l1(m2)) hi = m2;
        else lo = m1;
    }
    return std::min({best, l1(lo), l1(0.0)});
}

}  // namespace detail

/// Closed-form target with a certified analyticity radius R': the target is
/// holomorphic on { z : |Re z| + |Im z| < R' }.
struct HolomorphicTarget {
    TargetFamily family;
    double analyticity_radius = INFINITY;

    int dim() const
    {
        return std::visit(
            [](const auto& f) -> int {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PolynomialFamily> || std::is_same_v<F, LorentzianFamily>) return f.dim;
                else return 1;
            },
            family);
    }

    Complex operator()(const ComplexPoint& z) const
    {
        if (z.dim() != static_cast<std::size_t>(dim())) throw std::invalid_argument("target: dimension mismatch");
        return std::visit(
            [&](const auto& f) -> Complex {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PolynomialFamily>) {
                    Complex sum{0.0, 0.0};
                    for (const auto& m : f.terms) {
                        Complex term = m.coefficient;
                        for (std::size_t k = 0; k < m.powers.size(); ++k)
                            for (int p = 0; p < m.powers[k]; ++p) term *= z[k];
                        sum += term;
                    }
                    return sum;
                } else if constexpr (std::is_same_v<F, LorentzianFamily>) {
                    return lorentzian_target(f.alpha, z);
                } else if constexpr (std::is_same_v<F, PoleQuotientFamily>) {
                    const Complex d = z[0] - f.pole;
                    if (d == Complex{0.0, 0.0}) throw std::domain_error("target: pole");
                    return 1.0 / d;
                } else {
                    return singular_family_value(z, RealVector{f.x0}, f.a);
                }
            },
            family);
    }

    std::string describe() const
    {
        std::ostringstream os;
        os.precision(17);
        std::visit(
            [&](const auto& f) {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PolynomialFamily>) {
                    os << "polynomial d=" << f.dim << " terms=";
                    for (std::size_t i = 0; i < f.terms.size(); ++i) {
                        if (i) os << ';';
                        os << f.terms[i].coefficient.real() << ',' << f.terms[i].coefficient.imag() << ':';
                        for (std::size_t k = 0; k < f.terms[i].powers.size(); ++k)
                            os << (k ? "," : "") << f.terms[i].powers[k];
                    }
                } else if constexpr (std::is_same_v<F, LorentzianFamily>) {
                    os << "lorentzian d=" << f.dim << " alpha=" << f.alpha;
                } else if constexpr (std::is_same_v<F, PoleQuotientFamily>) {
                    os << "pole-quotient pole=" << f.pole.real() << ',' << f.pole.imag();
                } else {
                    os << "singular-e1 x0=" << f.x0 << " a=" << f.a.real() << ',' << f.a.imag();
                }
            },
            family);
        os << " radius=" << analyticity_radius;
        return os.str();
    }
};

inline HolomorphicTarget make_polynomial_target(std::vector<Monomial> terms, int d)
{
    if (d < 1) throw std::invalid_argument("polynomial target: d must be >= 1");
    for (const auto& m : terms) {
        if (m.powers.size() != static_cast<std::size_t>(d))
            throw std::invalid_argument("polynomial target: exponent count must equal d");
        for (int p : m.powers)
            if (p < 0) throw std::invalid_argument("polynomial target: negative exponent");
    }
    return {PolynomialFamily{std::move(terms), d}, INFINITY};
}

/// Singular where z^T z = -4 pi^2 alpha^2, i.e. on |Im z| = 2 pi alpha.
inline HolomorphicTarget make_lorentzian_target(double alpha, int d)
{
    if (!(alpha > 0.0) || d < 1) throw std::invalid_argument("lorentzian target: need alpha > 0 and d >= 1");
    return {LorentzianFamily{alpha, d}, 2.0 * kPi * alpha};
}

inline HolomorphicTarget make_pole_quotient_target(Complex pole)
{
    const double r = std::abs(pole.real()) + std::abs(pole.imag());
    if (!(r > 0.0)) throw std::invalid_argument("pole-quotient target: pole must be nonzero");
    return {PoleQuotientFamily{pole}, r};
}

inline HolomorphicTarget make_singular_e1_target(double x0, Complex a)
{
    return {SingularE1Family{x0, a}, detail::singular_e1_radius(x0, a)};
}

/// max over samples of |d/dx f + i d/dy f| for each coordinate, by central
/// differences with step h.
template <class F>
double cauchy_riemann_residual(F&& f, const std::vector<ComplexPoint>& samples, double h = 1e-5)
{
    double worst = 0.0;
    for (const auto& z : samples) {
        for (std::size_t k = 0; k < z.dim(); ++k) {
            auto shifted = [&](double dx, double dy) {
                ComplexPoint w = z;
                w.re[k] += dx;
                w.im[k] += dy;
                return f(w);
            };
            const Complex dx = (shifted(h, 0.0) - shifted(-h, 0.0)) / (2.0 * h);
            const Complex dy = (shifted(0.0, h) - shifted(0.0, -h)) / (2.0 * h);
            worst = std::max(worst, std::abs(dx + kI * dy));
        }
    }
    return worst;
}

// ---------------------------------------------------------------- cutoff

/// Smooth step B(s) = e(s) / (e(s) + e(1 - s)), e(s) = exp(-1/s) for s > 0.
inline double smooth_step(double s)
{
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

inline double smooth_step_derivative(double s)
{
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    const double da = a / (s * s), db = -b / ((1.0 - s) * (1.0 - s));
    return (da * b - a * db) / ((a + b) * (a + b));
}

/// Radial bump, 1 on [0, R] and 0 on [Rp, inf).
struct CutoffBump {
    double R = 1.0;
    double Rp = 1.5;

    double operator()(double r) const { return smooth_step((Rp - r) / (Rp - R)); }
    double derivative(double r) const { return -smooth_step_derivative((Rp - r) / (Rp - R)) / (Rp - R); }
};

inline CutoffBump make_cutoff(double R, double Rp)
{
    if (!(R > 0.0) || !(R < Rp)) throw std::invalid_argument("make_cutoff: need 0 < R < Rp");
    return {R, Rp};
}

// ---------------------------------------------------------------- slice evolution

/// Largest tolerated exp(|Im w|^2 / 4t) before cancellation eats the result.
inline constexpr double kAmplificationLimit = 1e12;

inline double amplification(double t, double imag_norm) { return std::exp(imag_norm * imag_norm / (4.0 * t)); }

inline void check_amplification(double t, double imag_norm)
{
    if (amplification(t, imag_norm) > kAmplificationLimit) {
        std::ostringstream os;
        os << "amplification guard: exp(|Im w|^2/4t) = exp(" << imag_norm * imag_norm / (4.0 * t) << ") exceeds 1e12 at t="
           << t << "; use t >= " << imag_norm * imag_norm / (4.0 * std::log(kAmplificationLimit));
        throw GuardError(os.str());
    }
}

/// F(w) = (4 pi t)^(-d/2) int exp(-(w - y)^T (w - y) / 4t) f(y) dy over the
/// cube [-extent, extent]^d, for real-sampled data f and complex w. Nodes are
/// fixed at construction, so each evaluation is an O(n^d) sum.
class GaussianTransform {
public:
    /// `width` bounds the panel size; f takes a RealVector.
    template <class F>
    GaussianTransform(int dim, double t, double extent, double width, F&& f) : t_(t), dim_(dim)
    {
        if (!(t > 0.0)) throw std::invalid_argument("gaussian transform: t must be positive");
        if (dim_ < 1 || dim_ > 2) throw std::invalid_argument("gaussian transform: only d = 1, 2 are supported");
        const auto panels = static_cast<std::size_t>(std::ceil(2.0 * extent / width));
        const auto rule = composite_gauss(-extent, extent, panels, 16);
        nodes_ = rule.nodes;
        const std::size_t n = nodes_.size();
        if (dim_ == 1) {
            values_.resize(n);
            for (std::size_t i = 0; i < n; ++i) values_[i] = rule.weights[i] * Complex(f(RealVector{nodes_[i]}));
        } else {
            values_.assign(n * n, 0.0);
            parallel_for(n, [&](std::size_t i) {
                for (std::size_t j = 0; j < n; ++j)
                    values_[i * n + j] = rule.weights[i] * rule.weights[j] * Complex(f(RealVector{nodes_[i], nodes_[j]}));
            });
        }
    }

    double t() const { return t_; }

    Complex operator()(const ComplexPoint& w) const
    {
        if (w.dim() != static_cast<std::size_t>(dim_)) throw std::invalid_argument("gaussian transform: dimension mismatch");
        check_amplification(t_, w.imag_norm());
        const std::size_t n = nodes_.size();
        auto kernel = [&](Complex wk, std::vector<Complex>& out) {
            out.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const Complex d = wk - nodes_[i];
                out[i] = std::exp(-d * d / (4.0 * t_));
            }
        };
        std::vector<Complex> a, b;
        kernel(w[0], a);
        std::vector<Complex> terms(n);
        if (dim_ == 1) {
            for (std::size_t i = 0; i < n; ++i) terms[i] = a[i] * values_[i];
            return pairwise_sum(terms) / std::sqrt(4.0 * kPi * t_);
        }
        kernel(w[1], b);
        std::vector<Complex> inner(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) inner[j] = values_[i * n + j] * b[j];
            terms[i] = a[i] * pairwise_sum(inner);
        }
        return pairwise_sum(terms) / (4.0 * kPi * t_);
    }

private:
    double t_;
    int dim_;
    std::vector<double> nodes_;
    std::vector<Complex> values_;
};

/// Panel width resolving the Gaussian, the cutoff transition and the
/// oscillation exp(-i x.y / 2t) for |Im w| <= max_imag.
inline double transform_panel_width(double t, const CutoffBump& cutoff, double max_imag)
{
    double width = std::min(std::sqrt(t), 0.25 * (cutoff.Rp - cutoff.R));
    if (max_imag > 0.0) width = std::min(width, 10.0 * t / max_imag);
    return width;
}

/// Phi_t(w) = (4 pi t)^(-d/2) int exp(-(w - y)^T (w - y) / 4t) u(i y) psi(|y|) dy,
/// the entire extension of the heat evolution of the target's imaginary slice.
class SliceEvolver : public GaussianTransform {
public:
    SliceEvolver(const HolomorphicTarget& target, const CutoffBump& cutoff, double t, double max_imag = 0.0)
        : GaussianTransform(checked_dim(target, cutoff), t, cutoff.Rp, transform_panel_width(t, cutoff, max_imag),
                            [&](const RealVector& y) {
                                const double psi = cutoff(norm(y));
                                if (psi == 0.0) return Complex{0.0, 0.0};
                                return psi * target(ComplexPoint(RealVector(y.size(), 0.0), y));
                            })
    {
    }

private:
    static int checked_dim(const HolomorphicTarget& target, const CutoffBump& cutoff)
    {
        if (cutoff.Rp > target.analyticity_radius)
            throw std::invalid_argument("heat_evolve_slice: cutoff support exceeds the target's analyticity radius");
        return target.dim();
    }
};

inline Complex heat_evolve_slice(const HolomorphicTarget& target, const CutoffBump& cutoff, double t, const ComplexPoint& w)
{
    return SliceEvolver(target, cutoff, t, w.imag_norm())(w);
}

/// Bound on |Phi_t(w) - (uncut evolution)(w)|: the integral of
/// |kernel| |u(i y)| (1 - psi(|y|)) over R <= |y| <= Y, with Y the smaller of
/// the analyticity radius and |Re w| + Rp + 12 sqrt(t).
inline double cutoff_tail_bound(const HolomorphicTarget& target, const CutoffBump& cutoff, double t, const ComplexPoint& w)
{
    const int d = target.dim();
    const double Y =
        std::min(std::nextafter(target.analyticity_radius, 0.0), w.real_norm() + cutoff.Rp + 12.0 * std::sqrt(t));
    const double yim2 = std::pow(w.imag_norm(), 2);
    auto weight = [&](const RealVector& y) {
        double re2 = 0.0;
        for (int k = 0; k < d; ++k) re2 += std::pow(w.re[k] - y[k], 2);
        const double mag = std::exp(-(re2 - yim2) / (4.0 * t));
        ComplexPoint iy(RealVector(d, 0.0), y);
        return mag * std::abs(target(iy)) * (1.0 - cutoff(norm(y)));
    };
    const std::size_t panels = static_cast<std::size_t>(std::ceil((Y - cutoff.R) / std::min(0.1, std::sqrt(t) / 2.0))) + 1;
    if (d == 1) {
        const double pos = integrate_composite([&](double y) { return weight({y}); }, cutoff.R, Y, panels);
        const double neg = integrate_composite([&](double y) { return weight({-y}); }, cutoff.R, Y, panels);
        return (pos + neg) / std::sqrt(4.0 * kPi * t);
    }
    const auto rr = composite_gauss(cutoff.R, Y, panels, 16);
    const std::size_t nth = 128;
    double sum = 0.0;
    for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
        double ring = 0.0;
        for (std::size_t j = 0; j < nth; ++j) {
            const double th = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(nth);
            ring += weight({rr.nodes[i] * std::cos(th), rr.nodes[i] * std::sin(th)});
        }
        sum += rr.weights[i] * rr.nodes[i] * ring * 2.0 * kPi / static_cast<double>(nth);
    }
    return sum / (4.0 * kPi * t);
}

// ---------------------------------------------------------------- schedules

struct SynthesisGrids {
    /// interval: cells of the initial grid; disk: radial cells
    std::size_t nx = 400;
    /// disk only: angular nodes
    std::size_t ntheta = 32;
    /// schedule time steps on [0, T]
    std::size_t nt_sched = 5;
};

/// Initial state g on a grid and Dirichlet data h(t_k, y_j) on the boundary
/// nodes, with h at t = T set to the target trace.
struct ControlSchedule {
    DomainSpec domain;
    double T = 0.0;
    std::size_t nx = 0;
    std::size_t ntheta = 0;
    std::vector<RealVector> initial_points;
    std::vector<Complex> g;
    std::vector<double> times;
    std::vector<RealVector> boundary_nodes;
    /// indexed [k * boundary_nodes.size() + j]
    std::vector<Complex> h;

    std::string target_description;
    double cutoff_R = 0.0;
    double cutoff_Rp = 0.0;
    /// max exp(|Im w|^2 / 4t) over all evaluations
    double amplification = 1.0;
    /// max over boundary nodes of |h(t_{K-1}) - h(T)|
    double terminal_mismatch = 0.0;
    /// max over initial points of the cutoff tail bound at t = T
    double initial_tail_bound = 0.0;

    Complex h_at(std::size_t k, std::size_t j) const { return h[k * boundary_nodes.size() + j]; }
};

namespace detail {

struct CenteredBall {
    double R;
    int d;
};

inline CenteredBall require_centered_ball(const DomainSpec& domain)
{
    validate(domain);
    if (const auto* iv = std::get_if<Interval>(&domain)) {
        if (std::abs(iv->a + iv->b) > 1e-14 * (iv->b - iv->a))
            throw std::invalid_argument("wick_synthesize: interval must be centred at 0");
        return {0.5 * (iv->b - iv->a), 1};
    }
    if (const auto* b = std::get_if<Ball>(&domain)) {
        for (double c : b->center)
            if (c != 0.0) throw std::invalid_argument("wick_synthesize: ball must be centred at 0");
        if (b->dim > 2) throw std::invalid_argument("wick_synthesize: only d = 1, 2 are supported");
        return {b->radius, b->dim};
    }
    throw std::invalid_argument("wick_synthesize: domain must be a ball");
}

inline ComplexPoint wick(const RealVector& x)
{
    RealVector im(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) im[k] = -x[k];
    return {RealVector(x.size(), 0.0), im};
}

}  // namespace detail

/// g(x) = Phi_T(-i x) on the grid and h(t_k, y) = Phi_{T - t_k}(-i y) on the
/// boundary for t_k < T; h(T, y) is the target trace.
inline ControlSchedule wick_synthesize(const HolomorphicTarget& target, const DomainSpec& domain, double T,
                                       const CutoffBump& cutoff, const SynthesisGrids& grids)
{
    const auto ball = detail::require_centered_ball(domain);
    if (target.dim() != ball.d) throw std::invalid_argument("wick_synthesize: target and domain dimensions differ");
    if (!(T > 0.0)) throw std::invalid_argument("wick_synthesize: T must be positive");
    if (cutoff.R < ball.R) throw std::invalid_argument("wick_synthesize: cutoff must be 1 on the ball (cutoff.R >= R)");
    if (cutoff.Rp > target.analyticity_radius)
        throw std::invalid_argument("wick_synthesize: cutoff.Rp exceeds the target's analyticity radius");
    if (grids.nt_sched < 1) throw std::invalid_argument("wick_synthesize: nt_sched must be >= 1");
    // the smallest evolution time used is T / nt_sched at |Im w| = R
    check_amplification(T / static_cast<double>(grids.nt_sched), ball.R);

    ControlSchedule s;
    s.domain = domain;
    s.T = T;
    s.target_description = target.describe();
    s.cutoff_R = cutoff.R;
    s.cutoff_Rp = cutoff.Rp;
    if (ball.d == 1) {
        if (grids.nx < 2) throw std::invalid_argument("wick_synthesize: nx must be >= 2");
        s.nx = grids.nx;
        const double dx = 2.0 * ball.R / static_cast<double>(grids.nx);
        for (std::size_t i = 0; i <= grids.nx; ++i)
            s.initial_points.push_back({i == grids.nx ? ball.R : -ball.R + dx * static_cast<double>(i)});
        s.boundary_nodes = {{-ball.R}, {ball.R}};
    } else {
        const PolarGrid pg{{0.0, 0.0}, ball.R, grids.nx, grids.ntheta};
        if (grids.nx < 16 || grids.ntheta < 4 || grids.ntheta % 2)
            throw std::invalid_argument("wick_synthesize: disk grids need nx >= 16 and an even ntheta");
        s.nx = grids.nx;
        s.ntheta = grids.ntheta;
        for (std::size_t i = 0; i < grids.nx; ++i)
            for (std::size_t j = 0; j < grids.ntheta; ++j) s.initial_points.push_back(pg.point(i, j));
        for (std::size_t j = 0; j < grids.ntheta; ++j) s.boundary_nodes.push_back(pg.boundary_point(j));
    }

    // initial state
    {
        const SliceEvolver phi(target, cutoff, T, ball.R);
        s.g.resize(s.initial_points.size());
        parallel_for(s.initial_points.size(), [&](std::size_t i) { s.g[i] = phi(detail::wick(s.initial_points[i])); });
        s.amplification = std::max(s.amplification, amplification(T, ball.R));
        std::vector<double> tails(s.initial_points.size());
        const std::size_t stride = std::max<std::size_t>(1, s.initial_points.size() / 16);
        parallel_for(s.initial_points.size(), [&](std::size_t i) {
            if (i % stride == 0 || i + 1 == s.initial_points.size())
                tails[i] = cutoff_tail_bound(target, cutoff, T, detail::wick(s.initial_points[i]));
        });
        for (double v : tails) s.initial_tail_bound = std::max(s.initial_tail_bound, v);
    }

    // boundary data
    const std::size_t K = grids.nt_sched;
    const std::size_t nb = s.boundary_nodes.size();
    s.h.resize((K + 1) * nb);
    for (std::size_t k = 0; k <= K; ++k) s.times.push_back(k == K ? T : T * static_cast<double>(k) / static_cast<double>(K));
    for (std::size_t k = 0; k < K; ++k) {
        const double age = T - s.times[k];
        const SliceEvolver phi(target, cutoff, age, ball.R);
        s.amplification = std::max(s.amplification, amplification(age, ball.R));
        parallel_for(nb, [&](std::size_t j) { s.h[k * nb + j] = phi(detail::wick(s.boundary_nodes[j])); });
    }
    for (std::size_t j = 0; j < nb; ++j) {
        s.h[K * nb + j] = target(ComplexPoint::real(s.boundary_nodes[j]));
        s.terminal_mismatch = std::max(s.terminal_mismatch, std::abs(s.h[(K - 1) * nb + j] - s.h[K * nb + j]));
    }
    return s;
}

/// Boundary data at time t, linear in time between schedule samples.
inline Complex schedule_boundary_value(const ControlSchedule& s, double t, std::size_t node)
{
    const std::size_t K = s.times.size() - 1;
    if (t <= 0.0) return s.h_at(0, node);
    if (t >= s.T) return s.h_at(K, node);
    const double pos = t / s.T * static_cast<double>(K);
    const std::size_t k = std::min(K - 1, static_cast<std::size_t>(pos));
    const double w = (t - s.times[k]) / (s.times[k + 1] - s.times[k]);
    return (1.0 - w) * s.h_at(k, node) + w * s.h_at(k + 1, node);
}

struct RoundtripReport {
    double sup_error = 0.0;
    double l2_error = 0.0;
    std::vector<RealVector> points;
    std::vector<Complex> computed;
    std::vector<Complex> expected;
};

/// Runs the finite-difference solver from g with boundary data h and compares
/// u(T) against the target on the interior grid.
inline RoundtripReport roundtrip_verify(const ControlSchedule& s, const HolomorphicTarget& target, std::size_t nt_solver)
{
    if (nt_solver < 1) throw std::invalid_argument("roundtrip_verify: nt must be >= 1");
    const auto ball = detail::require_centered_ball(s.domain);
    const double dt = s.T / static_cast<double>(nt_solver);
    FieldSample field;
    if (ball.d == 1) {
        std::vector<std::array<Complex, 2>> h(nt_solver + 1);
        for (std::size_t n = 0; n <= nt_solver; ++n) {
            const double t = n == nt_solver ? s.T : dt * static_cast<double>(n);
            h[n] = {schedule_boundary_value(s, t, 0), schedule_boundary_value(s, t, 1)};
        }
        field = crank_nicolson_interval(Interval{-ball.R, ball.R}, s.g, h, s.T, nt_solver);
    } else {
        const PolarGrid pg{{0.0, 0.0}, ball.R, s.nx, s.ntheta};
        std::vector<Complex> h((nt_solver + 1) * s.ntheta);
        for (std::size_t n = 0; n <= nt_solver; ++n) {
            const double t = n == nt_solver ? s.T : dt * static_cast<double>(n);
            for (std::size_t j = 0; j < s.ntheta; ++j) h[n * s.ntheta + j] = schedule_boundary_value(s, t, j);
        }
        field = crank_nicolson_disk(pg, s.g, h, s.T, nt_solver);
    }
    RoundtripReport r;
    const std::size_t last = field.times.size() - 1;
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < field.size(); ++j) {
        if (!field.interior[j]) continue;
        const Complex want = target(ComplexPoint::real(field.spatial_grid[j]));
        const Complex got = field.at(last, j);
        r.points.push_back(field.spatial_grid[j]);
        r.computed.push_back(got);
        r.expected.push_back(want);
        r.sup_error = std::max(r.sup_error, std::abs(got - want));
        sq += std::norm(got - want);
        ++count;
    }
    r.l2_error = std::sqrt(sq / static_cast<double>(std::max<std::size_t>(1, count)));
    return r;
}

/// Round trip with the synthesized data replaced by exact target values on
/// the same grids. For a stationary target this isolates the solver's own
/// discretisation error.
inline RoundtripReport discretisation_baseline(const ControlSchedule& s, const HolomorphicTarget& target,
                                               std::size_t nt_solver)
{
    ControlSchedule exact = s;
    for (std::size_t i = 0; i < exact.g.size(); ++i) exact.g[i] = target(ComplexPoint::real(exact.initial_points[i]));
    for (std::size_t k = 0; k < exact.times.size(); ++k)
        for (std::size_t j = 0; j < exact.boundary_nodes.size(); ++j)
            exact.h[k * exact.boundary_nodes.size() + j] = target(ComplexPoint::real(exact.boundary_nodes[j]));
    return roundtrip_verify(exact, target, nt_solver);
}

}  // namespace heatreach
