#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "heatreach/geometry.hpp"
#include "heatreach/parallel.hpp"
#include "heatreach/quadrature.hpp"
#include "heatreach/special_functions.hpp"
#include "heatreach/types.hpp"
#include "heatreach/wick_synthesis.hpp"

namespace heatreach {

// ---------------------------------------------------------------- convergence

struct ConvergenceEntry {
    double t = 0.0;
    double sup_error = 0.0;
};

struct ConvergenceReport {
    double margin = 0.0;
    SampleCounts counts;
    std::size_t sample_size = 0;
    std::vector<ConvergenceEntry> entries;

    bool strictly_decreasing() const
    {
        for (std::size_t k = 1; k < entries.size(); ++k)
            if (!(entries[k].sup_error < entries[k - 1].sup_error)) return false;
        return !entries.empty();
    }
};

namespace detail {

struct BallFrame {
    RealVector center;
    double radius;
};

inline BallFrame ball_frame(const DomainSpec& domain)
{
    validate(domain);
    if (const auto* iv = std::get_if<Interval>(&domain)) return {{0.5 * (iv->a + iv->b)}, 0.5 * (iv->b - iv->a)};
    if (const auto* b = std::get_if<Ball>(&domain)) {
        if (b->dim > 2) throw std::invalid_argument("only d = 1, 2 are supported");
        return {b->center, b->radius};
    }
    throw std::invalid_argument("domain must be an interval or a ball");
}

}  // namespace detail

/// K_t(u chi)(z) - u(z) on a compact subset of the egg, where K_t(u chi) is the
/// real-axis Gaussian integral continued to complex z and chi is the radial
/// cutoff restricted to the real slice.
inline ConvergenceReport convergence_sweep(const HolomorphicTarget& target, const DomainSpec& domain,
                                           const CutoffBump& cutoff, double margin, const std::vector<double>& ts,
                                           const SampleCounts& counts = {})
{
    const auto frame = detail::ball_frame(domain);
    const std::size_t d = frame.center.size();
    if (static_cast<std::size_t>(target.dim()) != d) throw std::invalid_argument("convergence_sweep: dimension mismatch");
    if (cutoff.R < frame.radius) throw std::invalid_argument("convergence_sweep: cutoff must be 1 on the closed domain");
    if (ts.empty()) throw std::invalid_argument("convergence_sweep: no times");
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (!(ts[k] > 0.0)) throw std::invalid_argument("convergence_sweep: times must be positive");
        if (k && !(ts[k] < ts[k - 1])) throw std::invalid_argument("convergence_sweep: times must be strictly decreasing");
    }
    const auto samples = sample_compact_subset(domain, margin, counts);
    double max_imag = 0.0;
    for (const auto& z : samples) max_imag = std::max(max_imag, z.imag_norm());
    for (double t : ts) check_amplification(t, max_imag);

    ConvergenceReport report{margin, counts, samples.size(), {}};
    std::vector<Complex> exact(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) exact[i] = target(samples[i]);
    for (double t : ts) {
        const GaussianTransform k(static_cast<int>(d), t, cutoff.Rp, transform_panel_width(t, cutoff, max_imag),
                                  [&](const RealVector& w) {
                                      const double chi = cutoff(norm(w));
                                      if (chi == 0.0) return Complex{0.0, 0.0};
                                      RealVector x(d);
                                      for (std::size_t j = 0; j < d; ++j) x[j] = frame.center[j] + w[j];
                                      return chi * target(ComplexPoint::real(x));
                                  });
        std::vector<double> err(samples.size());
        parallel_for(samples.size(), [&](std::size_t i) {
            ComplexPoint shifted = samples[i];
            for (std::size_t j = 0; j < d; ++j) shifted.re[j] -= frame.center[j];
            err[i] = std::abs(k(shifted) - exact[i]);
        });
        double worst = 0.0;
        for (double e : err) worst = std::max(worst, e);
        report.entries.push_back({t, worst});
    }
    return report;
}

// ---------------------------------------------------------------- contour shift

/// chi(x + i y) = B((Lp - n(x, y)) / (Lp - L)) with the smoothed l1 norm
/// n = sqrt(x^2 + b^2) + sqrt(y^2 + b^2) - 2b. Equal to 1 on the closed egg
/// |x| + |y| <= L and supported in |x| + |y| < Lp + 2b.
struct TubeCutoff {
    double L = 1.0;
    double Lp = 1.4;
    double beta = 0.01;

    double smoothed_norm(double x, double y) const
    {
        return std::sqrt(x * x + beta * beta) + std::sqrt(y * y + beta * beta) - 2.0 * beta;
    }
    double argument(double x, double y) const { return (Lp - smoothed_norm(x, y)) / (Lp - L); }
    double operator()(double x, double y) const { return smooth_step(argument(x, y)); }

    /// d chi / d conj(w) = B'(s) (-1 / (Lp - L)) (dn/dx + i dn/dy) / 2
    Complex dbar(double x, double y) const
    {
        const double ds = smooth_step_derivative(argument(x, y));
        if (ds == 0.0) return {0.0, 0.0};
        const Complex dn{x / std::sqrt(x * x + beta * beta), y / std::sqrt(y * y + beta * beta)};
        return -0.5 * ds / (Lp - L) * dn;
    }

    double support_radius() const { return Lp + 2.0 * beta; }
};

struct ContourShiftResult {
    Complex direct;
    Complex I1;
    Complex I2;
    double residual() const { return std::abs(direct - (I1 + I2)); }
};

/// Splits the real-axis integral K_t(u chi)(z) into the shifted-contour part
/// I1 over R + i Im z and the tube part I2 = 2i int exp(-(z-w)^2/4t) u dbar(chi).
inline ContourShiftResult contour_shift_check(const ComplexPoint& zp, double t, const HolomorphicTarget& target,
                                              const TubeCutoff& tube)
{
    if (target.dim() != 1 || zp.dim() != 1) throw std::invalid_argument("contour_shift_check: d = 1 only");
    if (!(t > 0.0)) throw std::invalid_argument("contour_shift_check: t must be positive");
    if (!(tube.L > 0.0) || !(tube.Lp > tube.L) || !(tube.beta > 0.0))
        throw std::invalid_argument("contour_shift_check: tube cutoff needs 0 < L < Lp and beta > 0");
    if (tube.support_radius() > target.analyticity_radius)
        throw std::invalid_argument("contour_shift_check: cutoff support exceeds the target's analyticity radius");
    const Complex z = zp[0];
    if (!(std::abs(z.real()) + std::abs(z.imag()) < tube.L))
        throw std::invalid_argument("contour_shift_check: z must lie in the egg");
    const double X = z.real(), v = z.imag();
    check_amplification(t, std::abs(v));

    const double extent = tube.support_radius();
    double width = std::min(std::sqrt(t), (tube.Lp - tube.L) / 8.0);
    if (v != 0.0) width = std::min(width, 10.0 * t / std::abs(v));
    const auto xs = composite_gauss(-extent, extent, static_cast<std::size_t>(std::ceil(2.0 * extent / width)), 16);
    const double norm1 = 1.0 / std::sqrt(4.0 * kPi * t);
    auto u = [&](double x, double y) { return target(ComplexPoint::scalar({x, y})); };

    ContourShiftResult r;
    std::vector<Complex> d(xs.nodes.size()), s(xs.nodes.size());
    for (std::size_t i = 0; i < xs.nodes.size(); ++i) {
        const double x = xs.nodes[i];
        const double chi0 = tube(x, 0.0), chiv = tube(x, v);
        const Complex dz = z - x;
        d[i] = chi0 == 0.0 ? Complex{} : xs.weights[i] * std::exp(-dz * dz / (4.0 * t)) * chi0 * u(x, 0.0);
        s[i] = chiv == 0.0 ? Complex{} : xs.weights[i] * std::exp(-(X - x) * (X - x) / (4.0 * t)) * chiv * u(x, v);
    }
    r.direct = norm1 * pairwise_sum(d);
    r.I1 = norm1 * pairwise_sum(s);
    if (v == 0.0) return r;

    const auto ys = composite_gauss(0.0, std::abs(v), static_cast<std::size_t>(std::ceil(std::abs(v) / width)), 16);
    std::vector<Complex> rows(ys.nodes.size());
    parallel_for(ys.nodes.size(), [&](std::size_t j) {
        const double y = v > 0.0 ? ys.nodes[j] : -ys.nodes[j];
        std::vector<Complex> row(xs.nodes.size());
        for (std::size_t i = 0; i < xs.nodes.size(); ++i) {
            const double x = xs.nodes[i];
            const Complex db = tube.dbar(x, y);
            if (db == Complex{0.0, 0.0}) continue;
            const Complex dz = z - Complex{x, y};
            row[i] = xs.weights[i] * std::exp(-dz * dz / (4.0 * t)) * u(x, y) * db;
        }
        rows[j] = ys.weights[j] * pairwise_sum(row);
    });
    r.I2 = (v > 0.0 ? 2.0 : -2.0) * kI * norm1 * pairwise_sum(rows);
    return r;
}

struct TubeGapReport {
    /// min over supp dbar(chi) of |Im w| - sd(Re w), sd(x) = L - |x| the signed
    /// boundary distance (the unsigned one fails for real w outside the interval)
    double epsilon1 = INFINITY;
    /// min over sampled pairs of |Re(z - w)| - |Im(z - w)| - epsilon1
    double worst_margin = INFINITY;
    std::size_t pairs = 0;
};

/// Samples z in the egg of (-L, L) and w in the segment tube between Re and
/// z that meets supp dbar(chi), and checks |Im(z - w)| <= |Re(z - w)| - eps1.
inline TubeGapReport tube_gap_check(const TubeCutoff& tube, std::size_t nz = 24, std::size_t nw = 200)
{
    TubeGapReport r;
    auto signed_dist = [&](double x) { return tube.L - std::abs(x); };
    const double ext = tube.support_radius();
    auto in_support = [&](double x, double y) {
        const double s = tube.argument(x, y);
        return s > 0.0 && s < 1.0;
    };
    for (std::size_t i = 0; i <= 4 * nw; ++i)
        for (std::size_t j = 0; j <= 4 * nw; ++j) {
            const double x = -ext + 2.0 * ext * static_cast<double>(i) / static_cast<double>(4 * nw);
            const double y = -ext + 2.0 * ext * static_cast<double>(j) / static_cast<double>(4 * nw);
            if (in_support(x, y)) r.epsilon1 = std::min(r.epsilon1, std::abs(y) - signed_dist(x));
        }
    for (std::size_t a = 0; a < nz; ++a)
        for (std::size_t b = 0; b < nz; ++b) {
            const double X = -tube.L + 2.0 * tube.L * (static_cast<double>(a) + 0.5) / static_cast<double>(nz);
            const double Y = (-1.0 + 2.0 * (static_cast<double>(b) + 0.5) / static_cast<double>(nz)) * signed_dist(X);
            for (std::size_t i = 0; i <= nw; ++i)
                for (std::size_t k = 0; k <= 16; ++k) {
                    const double x = -ext + 2.0 * ext * static_cast<double>(i) / static_cast<double>(nw);
                    const double y = Y * static_cast<double>(k) / 16.0;
                    if (!in_support(x, y)) continue;
                    ++r.pairs;
                    r.worst_margin = std::min(r.worst_margin, std::abs(X - x) - std::abs(Y - y) - r.epsilon1);
                }
        }
    return r;
}

// ---------------------------------------------------------------- optimality

struct OptimalityReport {
    double x0 = 0.0;
    Complex a;
    /// distance from the source point to the closed interval (> 0: exterior)
    double source_distance = 0.0;
    std::vector<Complex> points;
    std::vector<Complex> integral;
    std::vector<Complex> closed_form;
    /// the same time integral written as int_0^1 s^-1 exp(-((z-x0)^2+a)/4s) ds
    std::vector<Complex> explicit_form;
    double max_error = 0.0;
    double max_form_gap = 0.0;
};

namespace detail {

/// (4 pi)^(-d/2) int_0^t (t-s)^(-d/2) exp(-(z-x0)^2/4(t-s)) exp(-a/4(1-s)) (1-s)^(d/2-1) ds
/// at t = 1, with 1 - s = sigma^2 removing the endpoint factor.
inline Complex point_source_field(Complex z, double x0, Complex a, int d, std::size_t panels)
{
    const Complex q = (z - x0) * (z - x0);
    auto f = [&](double sigma) -> Complex {
        if (sigma <= 0.0) return {0.0, 0.0};
        const double gap = sigma * sigma;  // t - s = 1 - s
        const Complex val = std::pow(gap, -0.5 * d) * std::exp(-q / (4.0 * gap)) * std::exp(-a / (4.0 * gap)) *
                            std::pow(gap, 0.5 * d - 1.0);
        return 2.0 * sigma * val;
    };
    Complex sum{0.0, 0.0};
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = static_cast<double>(p) / static_cast<double>(panels);
        const double hi = static_cast<double>(p + 1) / static_cast<double>(panels);
        sum += integrate_adaptive(f, lo, hi, 1e-14);
    }
    return std::pow(4.0 * kPi, -0.5 * d) * sum;
}

inline Complex explicit_time_integral(Complex z, double x0, Complex a, int d, std::size_t panels)
{
    const Complex q = (z - x0) * (z - x0);
    auto f = [&](double s) -> Complex {
        if (s <= 0.0) return {0.0, 0.0};
        return std::exp(-q / (4.0 * s)) * std::exp(-a / (4.0 * s)) / s;
    };
    Complex sum{0.0, 0.0};
    for (std::size_t p = 0; p < panels; ++p)
        sum += integrate_adaptive(f, static_cast<double>(p) / static_cast<double>(panels),
                                  static_cast<double>(p + 1) / static_cast<double>(panels), 1e-14);
    return std::pow(4.0 * kPi, -0.5 * d) * sum;
}

}  // namespace detail

/// Egg grid of n x n points: x uniform in the middle 90% of the interval and
/// |y| up to 95% of the boundary distance.
inline std::vector<Complex> interval_egg_grid(const Interval& iv, std::size_t n)
{
    if (n < 2) throw std::invalid_argument("interval_egg_grid: n must be >= 2");
    const double c = 0.5 * (iv.a + iv.b), R = 0.5 * (iv.b - iv.a);
    std::vector<Complex> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = c + R * (-0.9 + 1.8 * static_cast<double>(i) / static_cast<double>(n - 1));
        const double dist = R - std::abs(x - c);
        for (std::size_t j = 0; j < n; ++j)
            out.push_back({x, 0.95 * dist * (-1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n - 1))});
    }
    return out;
}

/// For p outside the closed egg: the field of the point-source history at the
/// exterior point x0, evaluated by time quadrature, against the E1 closed form.
inline OptimalityReport optimality_cross_check(const Interval& iv, const ComplexPoint& p, std::size_t nt_quad,
                                               std::size_t grid = 10)
{
    if (nt_quad < 1) throw std::invalid_argument("optimality_cross_check: nt_quad must be >= 1");
    const DomainSpec domain = iv;
    const auto params = singular_family_params(p, domain);
    OptimalityReport r;
    r.x0 = params.x0[0];
    r.a = params.a;
    const auto bd = distance_to_boundary(domain, params.x0);
    if (!bd.exterior) throw std::domain_error("optimality_cross_check: source point is not exterior");
    r.source_distance = bd.distance;
    r.points = interval_egg_grid(iv, grid);
    const std::size_t n = r.points.size();
    r.integral.resize(n);
    r.closed_form.resize(n);
    r.explicit_form.resize(n);
    parallel_for(n, [&](std::size_t i) {
        const Complex z = r.points[i];
        r.integral[i] = detail::point_source_field(z, r.x0, r.a, 1, nt_quad);
        r.explicit_form[i] = detail::explicit_time_integral(z, r.x0, r.a, 1, nt_quad);
        r.closed_form[i] = singular_family_value(ComplexPoint::scalar(z), params.x0, r.a);
    });
    for (std::size_t i = 0; i < n; ++i) {
        r.max_error = std::max(r.max_error, std::abs(r.integral[i] - r.closed_form[i]));
        r.max_form_gap = std::max(r.max_form_gap, std::abs(r.integral[i] - r.explicit_form[i]));
    }
    return r;
}

// ---------------------------------------------------------------- monodromy

struct MonodromyReport {
    Complex singular_point;
    Complex center;
    double loop_radius = 0.0;
    int steps = 0;
    int winding = 0;
    Complex start;
    Complex end;
    Complex jump;
    Complex expected_jump;
};

/// Continues (4 pi)^(-d/2) E1(((z - x0)^2 + a) / 4) around the circle of the
/// given radius, centred on the singular point z* = x0 + sqrt(-a) (Im z* > 0)
/// unless another centre is given.
inline MonodromyReport monodromy_detect(double x0, Complex a, int d, double loop_radius, int steps = 128,
                                        std::optional<Complex> center = std::nullopt, int orientation = 1)
{
    if (steps < 16) throw std::invalid_argument("monodromy_detect: steps must be >= 16");
    if (!(loop_radius > 0.0)) throw std::invalid_argument("monodromy_detect: loop radius must be positive");
    if (d < 1) throw std::invalid_argument("monodromy_detect: d must be >= 1");
    if (orientation != 1 && orientation != -1) throw std::invalid_argument("monodromy_detect: orientation is +1 or -1");
    Complex root = std::sqrt(-a);
    if (root.imag() < 0.0) root = -root;
    MonodromyReport r;
    r.singular_point = x0 + root;
    r.center = center.value_or(r.singular_point);
    r.loop_radius = loop_radius;
    r.steps = steps;
    for (const Complex zr : {x0 + root, x0 - root})
        if (std::abs(std::abs(zr - r.center) - loop_radius) < 1e-6 * loop_radius)
            throw std::invalid_argument("monodromy_detect: loop passes through a singular point");

    std::vector<Complex> path(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
        const double th = orientation * 2.0 * kPi * (k == steps ? 1.0 : static_cast<double>(k) / steps);
        const Complex z = r.center + loop_radius * std::polar(1.0, th);
        path[static_cast<std::size_t>(k)] = 0.25 * ((z - x0) * (z - x0) + a);
    }
    const double angle = path_winding_angle(path);
    r.winding = static_cast<int>(std::lround(angle / (2.0 * kPi)));
    if (std::abs(r.winding) > 1)
        throw std::domain_error("monodromy_detect: loop encloses both roots (radius too large)");
    const double pref = std::pow(4.0 * kPi, -0.5 * d);
    r.start = pref * exp_integral_e1(path.front());
    r.end = pref * e1_continued(path);
    r.jump = r.end - r.start;
    r.expected_jump = -2.0 * kPi * kI * pref * static_cast<double>(r.winding);
    return r;
}

// ---------------------------------------------------------------- kernel checks

struct KernelDiagnostics {
    /// E1(1) from the series/continued fraction and from quadrature of int_1^inf e^-u/u du
    double e1_one = 0.0;
    double e1_quadrature = 0.0;
    /// max over t of |mass - 1|
    double mass_error_1d = 0.0;
    double mass_error_2d = 0.0;
    /// max over x of |int G(s, x - w) G(t, w) dw - G(s + t, x)|
    double semigroup_error = 0.0;
    /// max |heat_kernel_c - heat_kernel| over random real inputs
    double real_consistency_error = 0.0;
    std::size_t real_samples = 0;
    /// discrete Cauchy-Riemann residual of z -> G(t, z) on the given points
    double cr_residual = 0.0;
};

inline KernelDiagnostics kernel_diagnostics(const std::vector<ComplexPoint>& egg_points, std::uint64_t seed = 1,
                                            std::size_t random_inputs = 1000, double t_cr = 0.5)
{
    KernelDiagnostics k;
    k.e1_one = exp_integral_e1(1.0).real();
    // u = 1/v maps [1, inf) to (0, 1]
    k.e1_quadrature = integrate_adaptive([](double v) { return v > 0 ? std::exp(-1.0 / v) / v : 0.0; }, 0.0, 1.0);
    for (double t : {0.01, 0.3, 2.0}) {
        const double L = 20.0 * std::sqrt(t);
        const double m1 = integrate_composite([&](double x) { return heat_kernel(t, RealVector{x}); }, -L, L, 40);
        const auto rule = composite_gauss(-L, L, 20, 16);
        std::vector<double> terms;
        terms.reserve(rule.nodes.size() * rule.nodes.size());
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            for (std::size_t j = 0; j < rule.nodes.size(); ++j)
                terms.push_back(rule.weights[i] * rule.weights[j] * heat_kernel(t, RealVector{rule.nodes[i], rule.nodes[j]}));
        k.mass_error_1d = std::max(k.mass_error_1d, std::abs(m1 - 1.0));
        k.mass_error_2d = std::max(k.mass_error_2d, std::abs(pairwise_sum(terms) - 1.0));
    }
    const double s = 0.2, t = 0.35;
    for (double x : {0.0, 0.4, -1.3}) {
        const double lhs = integrate_composite(
            [&](double w) { return heat_kernel(s, RealVector{x - w}) * heat_kernel(t, RealVector{w}); }, -15.0, 15.0, 60);
        k.semigroup_error = std::max(k.semigroup_error, std::abs(lhs - heat_kernel(s + t, RealVector{x})));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> time(0.01, 2.0), coord(-3.0, 3.0);
    for (std::size_t i = 0; i < random_inputs; ++i) {
        const int d = 1 + static_cast<int>(i % 2);
        const double tt = time(rng);
        RealVector x(static_cast<std::size_t>(d));
        for (auto& v : x) v = coord(rng);
        const Complex c = heat_kernel_c(tt, ComplexPoint::real(x));
        k.real_consistency_error = std::max(k.real_consistency_error, std::abs(c - heat_kernel(tt, x)));
    }
    k.real_samples = random_inputs;
    k.cr_residual = cauchy_riemann_residual([&](const ComplexPoint& z) { return heat_kernel_c(t_cr, z); }, egg_points);
    return k;
}

}  // namespace heatreach
