#include <random>

#include <gtest/gtest.h>

#include "heatreach/quadrature.hpp"
#include "heatreach/special_functions.hpp"

using namespace heatreach;

namespace {

void expect_rel(Complex got, Complex want, double tol)
{
    EXPECT_LE(std::abs(got - want), tol * std::abs(want)) << "got " << got << " want " << want;
}

std::vector<Complex> circle(Complex centre, double radius, int steps, int turns = 1, double start = 0.0)
{
    std::vector<Complex> path;
    for (int k = 0; k <= steps * std::abs(turns); ++k) {
        const double th = start + (turns > 0 ? 1.0 : -1.0) * 2.0 * kPi * k / steps;
        path.push_back(centre + radius * Complex(std::cos(th), std::sin(th)));
    }
    return path;
}

}  // namespace

TEST(HeatKernel, ClosedFormValues)
{
    EXPECT_NEAR(heat_kernel(1.0 / (4.0 * kPi), RealVector{0.0}), 1.0, 1e-15);
    EXPECT_EQ(heat_kernel(-0.5, RealVector{0.3}), 0.0);
    EXPECT_EQ(heat_kernel(0.0, RealVector{0.0, 0.0}), 0.0);
    EXPECT_NEAR(heat_kernel(1.0, RealVector{2.0, 0.0}), std::exp(-1.0) / (4.0 * kPi), 1e-16);
}

TEST(HeatKernel, UnitMass)
{
    for (double t : {0.01, 0.3, 2.0}) {
        const double L = 20.0 * std::sqrt(t);
        const double m1 = integrate_composite([&](double x) { return heat_kernel(t, RealVector{x}); }, -L, L, 40);
        EXPECT_NEAR(m1, 1.0, 1e-8);
        // d = 2 is separable but integrate the true 2-D kernel on a tensor rule
        const auto rule = composite_gauss(-L, L, 20, 16);
        double m2 = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            for (std::size_t j = 0; j < rule.nodes.size(); ++j)
                m2 += rule.weights[i] * rule.weights[j] * heat_kernel(t, RealVector{rule.nodes[i], rule.nodes[j]});
        EXPECT_NEAR(m2, 1.0, 1e-8);
    }
}

TEST(HeatKernel, Semigroup)
{
    const double s = 0.2, t = 0.35;
    for (double x : {0.0, 0.4, -1.3}) {
        const double lhs = integrate_composite(
            [&](double w) { return heat_kernel(s, RealVector{x - w}) * heat_kernel(t, RealVector{w}); }, -15.0, 15.0, 60);
        EXPECT_NEAR(lhs, heat_kernel(s + t, RealVector{x}), 1e-8);
    }
}

TEST(HeatKernel, ComplexExtensionRestrictsExactly)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2.0, 2.0), T(1e-3, 2.0);
    for (int k = 0; k < 1000; ++k) {
        const double t = T(rng);
        const RealVector x = k % 2 ? RealVector{U(rng)} : RealVector{U(rng), U(rng)};
        const Complex c = heat_kernel_c(t, ComplexPoint::real(x));
        EXPECT_EQ(c.real(), heat_kernel(t, x));
        EXPECT_EQ(c.imag(), 0.0);
    }
}

TEST(HeatKernel, ComplexExamples)
{
    const double t = 0.3, y = 0.7;
    expect_rel(heat_kernel_c(t, ComplexPoint::scalar({0.0, y})), std::exp(y * y / (4 * t)) / std::sqrt(4 * kPi * t), 1e-15);
    const Complex want = Complex(std::cos(0.5), -std::sin(0.5)) / std::sqrt(4.0 * kPi);
    expect_rel(heat_kernel_c(1.0, ComplexPoint::scalar({1.0, 1.0})), want, 1e-15);
    EXPECT_EQ(heat_kernel_c(-1.0, ComplexPoint::scalar({1.0, 1.0})), Complex(0.0, 0.0));
}

TEST(E1, OracleValues)
{
    // mpmath reference values
    const std::vector<std::pair<Complex, Complex>> cases = {
        {{1.0, 0.0}, {0.21938393439552027368, 0.0}},
        {{0.5, 2.0}, {-0.23812693789267186849, -0.025877115590053964576}},
        {{-3.0, 0.5}, {-9.3836035093309434316, 0.12921297008462977011}},
        {{10.0, 10.0}, {-7.6698978415553488363e-7, 2.9581458278235624291e-6}},
        {{50.0, 0.0}, {3.7832640295504590187e-24, 0.0}},
        {{3.9, 0.1}, {0.004234588908746400972, -0.00051760241195047809167}},
        {{-20.0, 1.5}, {-3818619.0198561429612, 25247282.594376032285}},
        {{0.01, -0.02}, {3.2333099544943701135, 1.0872488264115450535}},
        {{-5.0, -3.0}, {19.843386431747206928, -21.708511291867810931}},
    };
    for (const auto& [z, want] : cases) expect_rel(exp_integral_e1(z), want, 1e-12);
}

TEST(E1, QuadratureOracleAtOne)
{
    // int_1^inf e^{-u}/u du, u = 1/v
    const double q = integrate_adaptive([](double v) { return v > 0 ? std::exp(-1.0 / v) / v : 0.0; }, 0.0, 1.0);
    EXPECT_NEAR(q, 0.219383934, 1e-8);
    EXPECT_NEAR(exp_integral_e1(1.0).real(), q, 1e-12);
}

TEST(E1, SmallArgumentLimitAndAsymptotics)
{
    for (double z : {1e-2, 1e-4, 1e-8})
        EXPECT_NEAR((exp_integral_e1(z) + kEulerGamma + std::log(z)).real(), 0.0, 2.0 * z);
    EXPECT_NEAR(exp_integral_e1(50.0).real() * std::exp(50.0) * 50.0, 1.0, 0.02);
    EXPECT_THROW(exp_integral_e1(0.0), std::domain_error);
}

TEST(E1, ConjugateSymmetry)
{
    for (Complex z : {Complex(0.3, 1.2), Complex(-2.0, 0.7), Complex(6.0, -5.0)})
        expect_rel(exp_integral_e1(std::conj(z)), std::conj(exp_integral_e1(z)), 1e-14);
}

TEST(E1Continued, TrivialAndLoops)
{
    const std::vector<Complex> still(5, Complex(1.0, 0.0));
    expect_rel(e1_continued(still), exp_integral_e1(1.0), 1e-15);
    const Complex e1 = exp_integral_e1(1.0);
    expect_rel(e1_continued(circle(0.0, 1.0, 64)), e1 - Complex(0, 2 * kPi), 1e-12);
    expect_rel(e1_continued(circle(0.0, 1.0, 64, 2)), e1 - Complex(0, 4 * kPi), 1e-12);
    expect_rel(e1_continued(circle(0.0, 1.0, 64, -1)), e1 + Complex(0, 2 * kPi), 1e-12);
}

TEST(E1Continued, JumpIndependentOfRadius)
{
    std::vector<Complex> jumps;
    for (double r : {0.5, 1.0, 2.0}) {
        const auto path = circle(0.0, r, 96);
        jumps.push_back(e1_continued(path) - exp_integral_e1(path.front()));
    }
    for (const auto& j : jumps) EXPECT_LT(std::abs(j - jumps[0]), 1e-10);
    EXPECT_NEAR(jumps[0].imag(), -2.0 * kPi, 1e-10);
}

TEST(E1Continued, NonEnclosingLoopHasNoJump)
{
    const auto path = circle(Complex(3.0, 0.0), 1.0, 64);
    EXPECT_LT(std::abs(e1_continued(path) - exp_integral_e1(path.front())), 1e-12);
}

TEST(E1Continued, Errors)
{
    const std::vector<Complex> through_zero = {1.0, 0.0, -1.0};
    EXPECT_THROW(e1_continued(through_zero), std::domain_error);
    const std::vector<Complex> coarse = {1.0, Complex(-1.0, 0.1)};
    EXPECT_THROW(e1_continued(coarse), std::invalid_argument);
}

TEST(SingularFamily, OracleValues)
{
    const RealVector x0{1.2};
    const Complex a{0.15, 1.12};
    expect_rel(singular_family_value(ComplexPoint::scalar(0.0), x0, a),
               {0.14674214951588904281, -0.10819320929547496159}, 1e-12);
    expect_rel(singular_family_value(ComplexPoint::scalar({0.3, 0.2}), x0, a),
               {0.24189878610425645679, -0.14698098004114529334}, 1e-12);
    EXPECT_THROW(singular_family_value(ComplexPoint::scalar({0.5, 0.8}), x0, a), std::domain_error);
}

TEST(SingularFamily, DecaysOnRealAxis)
{
    const RealVector x0{1.2};
    const Complex a{0.15, 1.12};
    double prev = INFINITY;
    for (double x : {2.0, 4.0, 8.0, 16.0}) {
        const Complex zeta = 0.25 * ((x - 1.2) * (x - 1.2) + a);
        const Complex g = singular_family_value(ComplexPoint::scalar(x), x0, a);
        EXPECT_LE(std::abs(g), exp_integral_e1(zeta.real()).real() / std::sqrt(4 * kPi) + 1e-15);
        EXPECT_LT(std::abs(g), prev);
        prev = std::abs(g);
    }
}

TEST(SingularFamily, ParamsInterval)
{
    const auto par = singular_family_params(ComplexPoint::scalar({0.5, 0.8}), Interval{-1.0, 1.0});
    ASSERT_EQ(par.x0.size(), 1u);
    EXPECT_NEAR(par.x0[0], 1.2, 1e-14);
    EXPECT_NEAR(par.a.real(), 0.15, 1e-14);
    EXPECT_NEAR(par.a.imag(), 1.12, 1e-14);
    EXPECT_THROW(singular_family_params(ComplexPoint::scalar({0.5, 0.4}), Interval{-1.0, 1.0}), std::invalid_argument);
}

TEST(SingularFamily, ParamsDisk)
{
    const ComplexPoint p{{0.5, 0.0}, {0.0, 0.8}};
    const auto par = singular_family_params(p, Ball{{0.0, 0.0}, 1.0, 2});
    EXPECT_NEAR(par.x0[0], 1.2, 1e-14);
    EXPECT_NEAR(par.x0[1], 0.0, 1e-14);
    EXPECT_NEAR(par.a.real(), 0.15, 1e-14);
}

TEST(SingularFamily, ParamsAdmissibleOnRandomPoints)
{
    const DomainSpec dom = Interval{-1.0, 1.0};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> X(-0.95, 0.95), Y(0.05, 1.5);
    int checked = 0;
    for (int k = 0; k < 500; ++k) {
        const ComplexPoint p = ComplexPoint::scalar({X(rng), Y(rng)});
        if (egg_contains(dom, p, EggMode::closed)) continue;
        const auto par = singular_family_params(p, dom);
        EXPECT_GT(par.a.real(), 0.0);
        EXPECT_LT(std::abs(p.re[0] - par.x0[0]), p.imag_norm());
        EXPECT_TRUE(distance_to_boundary(dom, par.x0).exterior);
        EXPECT_LT(std::abs(shifted_square(p, par.x0) + par.a), 1e-14);
        ++checked;
    }
    EXPECT_GT(checked, 100);
}

TEST(Lorentzian, Values)
{
    EXPECT_NEAR(lorentzian_constant(1), 1.0 / kPi, 1e-16);
    const double alpha = 1.0 / kPi;
    expect_rel(lorentzian_target(alpha, ComplexPoint::scalar(0.0)), 0.39894228040143267794, 1e-14);
    expect_rel(lorentzian_target(alpha, 1, ComplexPoint::scalar({0.3, 0.2})),
               {0.39367145700486750849, -0.011664339466810889388}, 1e-14);
    expect_rel(lorentzian_target(0.5, ComplexPoint{{0.3, -0.2}, {0.1, 0.4}}),
               {0.10192049835213586801, 0.0015553763334516445734}, 1e-13);
    expect_rel(lorentzian_target(0.5, ComplexPoint{{0.3, -0.2, 0.1}, {0.1, 0.4, 0.1}}),
               {0.051875411030983926781, 0.00084445062520298794844}, 1e-13);
    EXPECT_THROW(lorentzian_target(alpha, ComplexPoint::scalar({0.0, 2.0})), std::domain_error);
    EXPECT_THROW(lorentzian_target(alpha, 2, ComplexPoint::scalar(0.0)), std::invalid_argument);
}

TEST(Erfcx, OracleValues)
{
    expect_rel(erfcx({1.0, 1.0}), {0.30474420525691259246, -0.20821893820283162729}, 1e-13);
    expect_rel(erfcx({3.0, 0.5}), {0.17510521262315801276, -0.02663616844623088308}, 1e-13);
    expect_rel(erfcx({0.2, 5.0}), {0.0048070373359642432198, -0.1150401201311405638}, 1e-12);
    expect_rel(erfcx({0.0, 1.5}), {0.10539922456186433678, -0.48322733014076905793}, 1e-12);
    for (double x : {0.1, 1.0, 1.99, 2.01, 10.0})
        EXPECT_NEAR(erfcx(x).real(), std::exp(x * x) * std::erfc(x), 1e-13 * std::exp(x * x) * std::erfc(x));
}
