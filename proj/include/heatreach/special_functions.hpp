#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "heatreach/geometry.hpp"
#include "heatreach/types.hpp"

namespace heatreach {

/// Euler-Mascheroni constant to 20 significant digits.
inline constexpr double kEulerGamma = 0.57721566490153286061;

inline double heat_kernel_r2(double t, double r2, int d)
{
    if (t <= 0.0) return 0.0;
    return std::pow(4.0 * kPi * t, -0.5 * d) * std::exp(-r2 / (4.0 * t));
}

/// G(t, x) = (4 pi t)^(-d/2) exp(-|x|^2 / 4t) for t > 0 and 0 otherwise,
/// with d = x.size().
inline double heat_kernel(double t, std::span<const double> x)
{
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return heat_kernel_r2(t, r2, static_cast<int>(x.size()));
}

inline double heat_kernel(double t, std::span<const double> x, int d)
{
    if (static_cast<std::size_t>(d) != x.size()) throw std::invalid_argument("heat_kernel: dimension mismatch");
    return heat_kernel(t, x);
}

inline Complex heat_kernel_c_sq(double t, Complex zz, int d)
{
    if (t <= 0.0) return {0.0, 0.0};
    return std::pow(4.0 * kPi * t, -0.5 * d) * std::exp(-zz / (4.0 * t));
}

/// Holomorphic extension of the heat kernel in the space variable, using
/// z^T z in place of |x|^2. Real z reproduces heat_kernel bit for bit.
inline Complex heat_kernel_c(double t, const ComplexPoint& z)
{
    if (z.is_real()) return {heat_kernel(t, z.re), 0.0};
    return heat_kernel_c_sq(t, square(z), static_cast<int>(z.dim()));
}

namespace detail {

inline Complex e1_series(Complex z)
{
    // E1(z) = -gamma - log z - sum_{k>=1} (-z)^k / (k k!)
    Complex term{1.0, 0.0};
    Complex sum{0.0, 0.0};
    const double mag = std::abs(z);
    for (int k = 1; k < 500; ++k) {
        term *= -z / static_cast<double>(k);
        const Complex add = term / static_cast<double>(k);
        sum += add;
        if (k > mag && std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return -kEulerGamma - std::log(z) - sum;
}

inline Complex e1_continued_fraction(Complex z)
{
    // modified Lentz on E1(z) = exp(-z) / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
    constexpr double tiny = 1e-300;
    Complex f = z + 1.0;
    if (std::abs(f) < tiny) f = tiny;
    Complex c = f;
    Complex dd{0.0, 0.0};
    for (int i = 1; i < 20000; ++i) {
        const double an = -static_cast<double>(i) * static_cast<double>(i);
        const Complex bn = z + (2.0 * i + 1.0);
        dd = bn + an * dd;
        if (std::abs(dd) < tiny) dd = tiny;
        dd = 1.0 / dd;
        c = bn + an / c;
        if (std::abs(c) < tiny) c = tiny;
        const Complex delta = c * dd;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-z) / f;
}

}  // namespace detail

/// Principal branch of E1(z) = Gamma(0, z). Power series for |z| <= 4 and
/// close to the negative real axis, continued fraction elsewhere.
inline Complex exp_integral_e1(Complex z)
{
    if (z == Complex{0.0, 0.0}) throw std::domain_error("exp_integral_e1: logarithmic singularity at 0");
    const double mag = std::abs(z);
    if (mag <= 4.0) return detail::e1_series(z);
    if (z.real() < 0.0 && std::abs(z.imag()) <= 2.0 && mag <= 40.0) return detail::e1_series(z);
    return detail::e1_continued_fraction(z);
}

/// Total argument increment of a polyline as seen from the origin. Each step
/// must turn by less than pi/2.
inline double path_winding_angle(std::span<const Complex> path)
{
    if (path.empty()) throw std::invalid_argument("path_winding_angle: empty path");
    double total = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (path[k] == Complex{0.0, 0.0}) throw std::domain_error("path touches the branch point 0");
        if (k == 0) continue;
        const double step = std::arg(path[k] / path[k - 1]);
        if (std::abs(step) >= 0.5 * kPi)
            throw std::invalid_argument("path step too coarse for unambiguous continuation");
        total += step;
    }
    return total;
}

/// Analytic continuation of E1 along a polyline, starting on the principal
/// branch at path.front(). E1 = entire part - log z, so only the logarithm
/// needs to be continued.
inline Complex e1_continued(std::span<const Complex> path)
{
    const double winding = path_winding_angle(path);
    const Complex end = path.back();
    const Complex log_principal = std::log(end);
    const Complex log_continued{std::log(std::abs(end)), std::arg(path.front()) + winding};
    return exp_integral_e1(end) + log_principal - log_continued;
}

/// (4 pi)^(-d/2) E1(((z - x0)^T (z - x0) + a) / 4), the singular reachable
/// state built from a point source at x0.
inline Complex singular_family_value(const ComplexPoint& z, std::span<const double> x0, Complex a)
{
    const Complex sq = shifted_square(z, x0);
    const Complex zeta = 0.25 * (sq + a);
    // zero up to the rounding of the sum counts as the singular point
    if (std::abs(zeta) <= 1e-15 * (std::abs(sq) + std::abs(a))) throw std::domain_error("singular_family_value: evaluated at the singular point");
    return std::pow(4.0 * kPi, -0.5 * static_cast<double>(z.dim())) * exp_integral_e1(zeta);
}

struct SingularFamilyParams {
    RealVector x0;
    Complex a;
};

/// Chooses an exterior source point x0 with |Re p - x0| < |Im p| and
/// a = -(p - x0)^T (p - x0), so that the singular family is singular at p.
/// The source is placed on the ray from Re p through its nearest boundary
/// point, two thirds of the way from the boundary distance to |Im p|.
inline SingularFamilyParams singular_family_params(const ComplexPoint& p, const DomainSpec& domain)
{
    validate(domain);
    if (p.dim() != static_cast<std::size_t>(dimension(domain)))
        throw std::invalid_argument("singular_family_params: dimension mismatch");
    if (egg_contains(domain, p, EggMode::closed))
        throw std::invalid_argument("singular_family_params: p lies in the closed egg domain");

    const double y = p.imag_norm();
    const auto bd = distance_to_boundary(domain, p.re);
    auto finish = [&](RealVector x0) {
        const Complex a = -shifted_square(p, x0);
        if (!(a.real() > 0.0)) throw std::domain_error("singular_family_params: Re(a) not positive");
        return SingularFamilyParams{std::move(x0), a};
    };

    if (bd.exterior) {
        if (y == 0.0) throw std::domain_error("singular_family_params: no admissible x0 for real exterior p");
        return finish(p.re);
    }

    const RealVector dir = outward_direction(domain, p.re);
    for (double frac : {2.0 / 3.0, 0.5, 5.0 / 6.0, 1.0 / 3.0, 11.0 / 12.0, 1.0 / 6.0}) {
        const double s = bd.distance + frac * (y - bd.distance);
        RealVector x0(p.dim());
        for (std::size_t k = 0; k < p.dim(); ++k) x0[k] = p.re[k] + s * dir[k];
        const auto b0 = distance_to_boundary(domain, x0);
        if (b0.exterior && b0.distance > 0.0 && s < y) return finish(std::move(x0));
    }
    throw std::domain_error("singular_family_params: no admissible x0 found");
}

/// c_d = Gamma((d+1)/2) / pi^((d+1)/2)
inline double lorentzian_constant(int d)
{
    return std::tgamma(0.5 * (d + 1)) / std::pow(kPi, 0.5 * (d + 1));
}

/// c_d alpha (2 pi)^((d+2)/2) / (4 pi^2 alpha^2 + z^T z)^((d+1)/2), principal
/// power for even d.
inline Complex lorentzian_target(double alpha, const ComplexPoint& z)
{
    if (!(alpha > 0.0)) throw std::invalid_argument("lorentzian_target: alpha must be positive");
    const int d = static_cast<int>(z.dim());
    const Complex w = 4.0 * kPi * kPi * alpha * alpha + square(z);
    const double scale = lorentzian_constant(d) * alpha * std::pow(2.0 * kPi, 0.5 * (d + 2));
    if (d % 2 == 1) {
        if (w == Complex{0.0, 0.0}) throw std::domain_error("lorentzian_target: pole");
        Complex denom{1.0, 0.0};
        for (int k = 0; k < (d + 1) / 2; ++k) denom *= w;
        return scale / denom;
    }
    if (w.imag() == 0.0 && w.real() <= 0.0) throw std::domain_error("lorentzian_target: branch cut");
    return scale / std::pow(w, 0.5 * (d + 1));
}

inline Complex lorentzian_target(double alpha, int d, const ComplexPoint& z)
{
    if (static_cast<std::size_t>(d) != z.dim()) throw std::invalid_argument("lorentzian_target: dimension mismatch");
    return lorentzian_target(alpha, z);
}

/// Scaled complementary error function exp(z^2) erfc(z) for Re z >= 0.
inline Complex erfcx(Complex z)
{
    if (z.real() < 0.0) throw std::domain_error("erfcx: requires Re z >= 0");
    const double mag = std::abs(z);
    if (mag < 2.0) {
        // erf z = 2/sqrt(pi) exp(-z^2) sum_n 2^n z^(2n+1) / (2n+1)!!
        const Complex z2 = z * z;
        Complex term = z;
        Complex sum = z;
        for (int n = 1; n < 200; ++n) {
            term *= 2.0 * z2 / (2.0 * n + 1.0);
            sum += term;
            if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        }
        return std::exp(z2) - 2.0 / std::sqrt(kPi) * sum;
    }
    // Laplace continued fraction: sqrt(pi) erfcx(z) = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    constexpr double tiny = 1e-300;
    Complex f = z;
    Complex c = f;
    Complex dd{0.0, 0.0};
    for (int n = 1; n < 20000; ++n) {
        const double an = 0.5 * n;
        dd = z + an * dd;
        if (std::abs(dd) < tiny) dd = tiny;
        dd = 1.0 / dd;
        c = z + an / c;
        if (std::abs(c) < tiny) c = tiny;
        const Complex delta = c * dd;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / (std::sqrt(kPi) * f);
}

}  // namespace heatreach
