#include <random>

#include <gtest/gtest.h>

#include "heatreach/layer_potentials.hpp"

using namespace heatreach;

namespace {

constexpr double kSourceX = 3.0;
constexpr double kSourceT0 = 0.1;

// Field of a point source outside [-1, 1]; its values at t = 0 inside the
// interval are below 5e-5.
double exterior_field(double t, double x) { return heat_kernel(t + kSourceT0, RealVector{x - kSourceX}); }

Complex exterior_field_c(double t, Complex z)
{
    return heat_kernel_c_sq(t + kSourceT0, (z - kSourceX) * (z - kSourceX), 1);
}

BoundaryData exterior_data(const SpaceTimeGrid& grid)
{
    return sample_on_grid(grid, [](double t, const BoundaryNode& n) { return Complex(exterior_field(t, n.point[0])); });
}

double rel_l2(const BoundaryField& a, const BoundaryField& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        num += std::norm(a.values[k] - b.values[k]);
        den += std::norm(b.values[k]);
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST(Grid, IntervalNodes)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 2.0, 10);
    ASSERT_EQ(grid.node_count(), 2u);
    EXPECT_EQ(grid.nodes[0].point[0], -1.0);
    EXPECT_EQ(grid.nodes[0].normal[0], -1.0);
    EXPECT_EQ(grid.nodes[1].normal[0], 1.0);
    EXPECT_DOUBLE_EQ(grid.dt(), 0.2);
    EXPECT_DOUBLE_EQ(grid.midpoint(0), 0.1);
}

TEST(Grid, DiskAndPolygonWeightsAndNodes)
{
    const DomainSpec disk = Ball{{0.5, -0.5}, 2.0, 2};
    const auto g1 = make_space_time_grid(disk, 1.0, 4, 48);
    double len = 0.0;
    for (const auto& n : g1.nodes) {
        EXPECT_GT(n.weight, 0.0);
        EXPECT_LT(distance_to_boundary(disk, n.point).distance, 1e-12);
        len += n.weight;
    }
    EXPECT_NEAR(len, 4.0 * kPi, 1e-10);

    const DomainSpec poly = Polygon{{{0, 0}, {3, 0}, {3, 1}, {0, 2}}};
    const auto g2 = make_space_time_grid(poly, 1.0, 4, 6);
    len = 0.0;
    for (const auto& n : g2.nodes) {
        EXPECT_GT(n.weight, 0.0);
        EXPECT_LT(distance_to_boundary(poly, n.point).distance, 1e-12);
        // outward: a small step along the normal leaves the domain
        const RealVector out{n.point[0] + 1e-6 * n.normal[0], n.point[1] + 1e-6 * n.normal[1]};
        EXPECT_TRUE(distance_to_boundary(poly, out).exterior);
        len += n.weight;
    }
    EXPECT_NEAR(len, 3.0 + 1.0 + std::sqrt(10.0) + 2.0, 1e-10);
}

TEST(Grid, Rejects)
{
    EXPECT_THROW(make_space_time_grid(Interval{-1.0, 1.0}, 0.0, 4), std::invalid_argument);
    EXPECT_THROW(make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 0), std::invalid_argument);
    EXPECT_THROW(make_space_time_grid(Ball{{0, 0, 0}, 1.0, 3}, 1.0, 4), std::invalid_argument);
}

TEST(SlabKernel, MatchesQuadrature)
{
    for (Complex r2 : {Complex(0.0), Complex(0.49), Complex(1.0, 0.6), Complex(0.0, -0.3), Complex(4.0)}) {
        const double tau0 = 0.02, tau1 = 0.3;
        const Complex want = integrate_adaptive(
            [&](double s) { return Complex(std::pow(4 * kPi * s, -0.5)) * std::exp(-r2 / (4.0 * s)); }, tau0, tau1, 1e-14);
        EXPECT_LT(std::abs(detail::slab_kernel(1, r2, tau0, tau1) - want), 1e-12) << r2;
    }
    // d = 2 against an mpmath value
    EXPECT_NEAR(detail::slab_kernel(2, 0.3, 0.01, 0.2).real(), 0.059374895762749046631, 1e-13);
}

TEST(SingleLayer, ZeroDensity)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 8);
    const BoundaryDensity q(grid);
    EXPECT_EQ(single_layer_eval(q, 0.5, ComplexPoint::scalar({0.1, 0.2})), Complex(0.0));
    EXPECT_EQ(double_layer_eval(q, 0.5, RealVector{0.1}), Complex(0.0));
}

TEST(SingleLayer, ConstantDensityAtRightEndpoint)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 0.25, 7);
    BoundaryDensity q(grid);
    for (std::size_t i = 0; i < grid.nt; ++i) q.at(i, 1) = 1.0;
    const Complex s = single_layer_eval(q, 0.25, ComplexPoint::real({0.0}));
    // mpmath value of int_0^t G(t - s, 1) ds
    EXPECT_NEAR(s.real(), 0.025127270830006110506, 1e-12);
    // independent dense composite Gauss rule on the s-integral
    const double dense = integrate_composite(
        [](double s) { return heat_kernel(0.25 - s, RealVector{1.0}); }, 0.0, 0.25, 625, 16);
    EXPECT_NEAR(s.real(), dense, 1e-8);
}

TEST(SingleLayer, ComplexPointOracle)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 0.5, 5);
    BoundaryDensity q(grid);
    for (auto& v : q.values) v = 1.0;
    const Complex s = single_layer_eval(q, 0.5, ComplexPoint::scalar({0.2, 0.3}));
    EXPECT_LT(std::abs(s - Complex(0.15452966948240951847, 0.029037655106576576632)), 1e-12);
}

TEST(SingleLayer, Preconditions)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 8);
    const BoundaryDensity q(grid);
    EXPECT_THROW(single_layer_eval(q, 0.0, ComplexPoint::real({0.0})), std::invalid_argument);
    EXPECT_THROW(single_layer_eval(q, 1.5, ComplexPoint::real({0.0})), std::invalid_argument);
    EXPECT_THROW(single_layer_eval(q, 0.5, ComplexPoint::scalar({0.5, 0.6})), std::invalid_argument);
    EXPECT_THROW(single_layer_eval(q, 0.5, ComplexPoint::real({1.5})), std::invalid_argument);
    EXPECT_NO_THROW(single_layer_eval(q, 0.5, ComplexPoint::scalar({0.5, 0.5})));
    EXPECT_THROW(double_layer_eval(q, 0.5, RealVector{1.0}), std::invalid_argument);
}

TEST(DoubleLayer, ConstantDensitySign)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 0.25, 5);
    BoundaryDensity q(grid);
    for (std::size_t i = 0; i < grid.nt; ++i) q.at(i, 1) = 1.0;
    const Complex d = double_layer_eval(q, 0.25, RealVector{0.0});
    // mpmath value of int_0^t (n.(x-y)/2 tau) G(tau, x-y) dtau with y = 1, n = +1
    EXPECT_NEAR(d.real(), -0.078649603525142565329, 1e-12);
    // the kernel carries the sign of x - 1 for the right endpoint
    for (double x : {-0.9, 0.0, 0.7}) EXPECT_LT(double_layer_eval(q, 0.25, RealVector{x}).real(), 0.0);
}

TEST(BoundaryOperator, UnitSlabClosedForm)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 10);
    BoundaryDensity q(grid);
    q.at(0, 0) = 1.0;
    const auto g = boundary_operator_apply(q);
    // at the left node, midpoint of slab 1: int_0^dt (4 pi (t - s))^{-1/2} ds
    const double t = grid.midpoint(1), dt = grid.dt();
    const double want = (2.0 * std::sqrt(t) - 2.0 * std::sqrt(t - dt)) / std::sqrt(4.0 * kPi);
    EXPECT_NEAR(g.at(1, 0).real(), want, 1e-15);
    // nothing before the slab starts
    BoundaryDensity late(grid);
    late.at(4, 1) = 1.0;
    const auto gl = boundary_operator_apply(late);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(gl.at(i, j), Complex(0.0));
}

TEST(Volterra, ZeroData)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 16);
    const auto q = volterra_solve(BoundaryData(grid));
    for (const auto& v : q.values) EXPECT_EQ(v, Complex(0.0));
}

TEST(Volterra, ManufacturedDensityRecovery)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 128);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double c1 = U(rng), c2 = U(rng), c3 = U(rng), c4 = U(rng);
    const auto qstar = sample_on_grid(grid, [&](double t, const BoundaryNode& n) {
        return Complex(c1 * std::sin(3 * t + n.point[0]) + c2 * t * t, c3 * std::cos(2 * t) + c4 * n.point[0]);
    });
    const auto q = volterra_solve(boundary_operator_apply(qstar));
    EXPECT_LT(rel_l2(q, qstar), 1e-2);
    EXPECT_LT(rel_l2(q, qstar), 1e-10);
}

TEST(Volterra, ExteriorSourceInteriorAndEgg)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 128);
    const auto q = volterra_solve(exterior_data(grid));
    for (double x : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
        const Complex u = single_layer_eval(q, 1.0, ComplexPoint::real({x}));
        EXPECT_NEAR(u.real(), exterior_field(1.0, x), 1e-3);
        EXPECT_NEAR(u.real(), exterior_field(1.0, x), 1e-5);
    }
    for (Complex z : {Complex(0.0, 0.6), Complex(0.3, -0.5), Complex(-0.6, 0.3)}) {
        const Complex u = single_layer_eval(q, 1.0, ComplexPoint::scalar(z));
        EXPECT_LT(std::abs(u - exterior_field_c(1.0, z)), 1e-3);
    }
}

TEST(Volterra, RefinementReducesError)
{
    double prev = INFINITY;
    for (std::size_t nt : {32, 64, 128}) {
        const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, nt);
        const auto q = volterra_solve(exterior_data(grid));
        double err = 0.0;
        for (double x : {-0.5, 0.0, 0.3, 0.8})
            err = std::max(err, std::abs(single_layer_eval(q, 1.0, ComplexPoint::real({x})).real() - exterior_field(1.0, x)));
        EXPECT_LT(err * 1.5, prev);
        prev = err;
    }
}

TEST(Volterra, GreenRepresentation)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 128);
    const auto u = exterior_data(grid);
    const auto dn = sample_on_grid(grid, [](double t, const BoundaryNode& n) {
        const double r = n.point[0] - kSourceX;
        return Complex(n.normal[0] * (-r / (2.0 * (t + kSourceT0))) * exterior_field(t, n.point[0]));
    });
    for (double x : {-0.7, 0.0, 0.6}) {
        const Complex v = single_layer_eval(dn, 1.0, ComplexPoint::real({x})) - double_layer_eval(u, 1.0, RealVector{x});
        EXPECT_NEAR(v.real(), exterior_field(1.0, x), 1e-3);
        EXPECT_NEAR(v.imag(), 0.0, 1e-15);
    }
}

TEST(Volterra, Causality)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 64);
    const auto g = exterior_data(grid);
    const auto q = volterra_solve(g);
    BoundaryData cut = g;
    const std::size_t k = 20;
    for (std::size_t i = k + 1; i < grid.nt; ++i)
        for (std::size_t j = 0; j < 2; ++j) cut.at(i, j) = 0.0;
    const auto qc = volterra_solve(cut);
    for (std::size_t i = 0; i <= k; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(qc.at(i, j), q.at(i, j));
}

TEST(Volterra, Linearity)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 64);
    const VolterraOperator V(grid);
    const auto g1 = exterior_data(grid);
    const auto g2 = sample_on_grid(grid, [](double t, const BoundaryNode& n) { return Complex(t * n.point[0], t * t); });
    const Complex a(0.7, -0.2), b(-1.3, 0.5);
    BoundaryData mix(grid);
    for (std::size_t k = 0; k < mix.values.size(); ++k) mix.values[k] = a * g1.values[k] + b * g2.values[k];
    const auto q1 = V.solve(g1), q2 = V.solve(g2), qm = V.solve(mix);
    double scale = 0.0;
    for (const auto& v : qm.values) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < qm.values.size(); ++k)
        EXPECT_LT(std::abs(qm.values[k] - (a * q1.values[k] + b * q2.values[k])), 1e-12 * scale);
}

TEST(Volterra, CauchyRiemannInEgg)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 64);
    const auto q = volterra_solve(exterior_data(grid));
    const double h = 1e-4;
    for (Complex z : {Complex(0.0, 0.3), Complex(0.4, 0.2), Complex(-0.5, -0.3)}) {
        auto f = [&](Complex w) { return single_layer_eval(q, 1.0, ComplexPoint::scalar(w)); };
        const Complex dx = (f(z + h) - f(z - h)) / (2 * h);
        const Complex dy = (f(z + Complex(0, h)) - f(z - Complex(0, h))) / (2 * h);
        EXPECT_LT(std::abs(dx + kI * dy), 1e-4);
    }
}

TEST(Volterra, DiskExteriorSource)
{
    const auto grid = make_space_time_grid(Ball{{0.0, 0.0}, 1.0, 2}, 1.0, 32, 64);
    const RealVector src{2.5, 0.0};
    const auto g = sample_on_grid(grid, [&](double t, const BoundaryNode& n) {
        return Complex(heat_kernel(t + kSourceT0, RealVector{n.point[0] - src[0], n.point[1] - src[1]}));
    });
    const VolterraOperator V(grid);
    EXPECT_FALSE(V.regularized());
    const auto q = V.solve(g);
    for (const auto& x : {RealVector{0.0, 0.0}, RealVector{0.5, 0.2}, RealVector{-0.3, 0.6}}) {
        const double want = heat_kernel(1.0 + kSourceT0, RealVector{x[0] - src[0], x[1] - src[1]});
        EXPECT_NEAR(single_layer_eval(q, 1.0, ComplexPoint::real(x)).real(), want, 1e-3);
    }
}

TEST(Volterra, GridMismatch)
{
    const VolterraOperator V(make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 16));
    EXPECT_THROW(V.solve(BoundaryData(make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 8))), std::invalid_argument);
}

TEST(Dirichlet, ComposesSolveAndEvaluation)
{
    const auto grid = make_space_time_grid(Interval{-1.0, 1.0}, 1.0, 64);
    const std::vector<ComplexPoint> pts = {ComplexPoint::real({0.2}), ComplexPoint::scalar({0.1, 0.4})};
    const std::vector<double> times = {0.5, 1.0};
    const auto zero = dirichlet_solve_bie(BoundaryData(grid), pts, times);
    for (const auto& v : zero) EXPECT_EQ(v, Complex(0.0));
    const auto g = exterior_data(grid);
    const auto out = dirichlet_solve_bie(g, pts, times);
    const auto q = volterra_solve(g);
    ASSERT_EQ(out.size(), 4u);
    EXPECT_EQ(out[3], single_layer_eval(q, 1.0, pts[1]));
    EXPECT_LT(std::abs(out[3] - exterior_field_c(1.0, Complex(0.1, 0.4))), 1e-3);
}
