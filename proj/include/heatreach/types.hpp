#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatreach {

using Complex = std::complex<double>;
using RealVector = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Raised when a computation would silently lose all significant digits
/// (amplification guard, singular step matrix, failed search). Reported by
/// the CLI with exit status 3.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point z = x + iy of C^d, stored as the real vectors x and y.
struct ComplexPoint {
    RealVector re;
    RealVector im;

    ComplexPoint() = default;
    ComplexPoint(RealVector real, RealVector imag) : re(std::move(real)), im(std::move(imag))
    {
        if (re.size() != im.size() || re.empty())
            throw std::invalid_argument("ComplexPoint: re and im must have equal length >= 1");
    }

    /// Real point (y = 0).
    static ComplexPoint real(RealVector x)
    {
        RealVector zero(x.size(), 0.0);
        return {std::move(x), std::move(zero)};
    }

    /// One-dimensional point from a complex scalar.
    static ComplexPoint scalar(Complex z) { return {{z.real()}, {z.imag()}}; }

    std::size_t dim() const { return re.size(); }

    Complex operator[](std::size_t k) const { return {re[k], im[k]}; }

    double real_norm() const
    {
        double s = 0.0;
        for (double v : re) s += v * v;
        return std::sqrt(s);
    }

    double imag_norm() const
    {
        double s = 0.0;
        for (double v : im) s += v * v;
        return std::sqrt(s);
    }

    bool is_real() const
    {
        for (double v : im)
            if (v != 0.0) return false;
        return true;
    }
};

/// z^T z, the holomorphic extension of |x|^2 (not the hermitian norm).
inline Complex square(const ComplexPoint& z)
{
    Complex s{0.0, 0.0};
    for (std::size_t k = 0; k < z.dim(); ++k) s += z[k] * z[k];
    return s;
}

/// (z - x)^T (z - x) for a real shift x.
inline Complex shifted_square(const ComplexPoint& z, std::span<const double> x)
{
    if (x.size() != z.dim()) throw std::invalid_argument("shifted_square: dimension mismatch");
    Complex s{0.0, 0.0};
    for (std::size_t k = 0; k < z.dim(); ++k) {
        const Complex d = z[k] - x[k];
        s += d * d;
    }
    return s;
}

inline double norm(std::span<const double> v)
{
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

}  // namespace heatreach
