#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "heatreach/layer_potentials.hpp"
#include "heatreach/parallel.hpp"
#include "heatreach/reference_solver.hpp"
#include "heatreach/types.hpp"

namespace heatreach {

/// Dirichlet data of the interval (-L, L) at the nodes t_n = n T / (nt - 1):
/// h1 at -L, h2 at +L.
struct EndpointSignals {
    double L = 1.0;
    double T = 1.0;
    std::size_t nt = 0;
    std::vector<double> h1;
    std::vector<double> h2;

    double dt() const { return T / static_cast<double>(nt - 1); }
    double time(std::size_t n) const { return n + 1 == nt ? T : dt() * static_cast<double>(n); }
};

inline void validate(const EndpointSignals& s)
{
    if (!(s.L > 0.0) || !(s.T > 0.0)) throw std::invalid_argument("EndpointSignals: need L > 0 and T > 0");
    if (s.nt < 8) throw std::invalid_argument("EndpointSignals: need nt >= 8");
    if (s.h1.size() != s.nt || s.h2.size() != s.nt) throw std::invalid_argument("EndpointSignals: signal length != nt");
    const double scale = 1e-10 * std::max(1.0, std::max(std::abs(s.h1[1]), std::abs(s.h2[1])));
    if (std::abs(s.h1[0]) > scale || std::abs(s.h2[0]) > scale)
        throw std::invalid_argument("EndpointSignals: signals must start at 0");
}

/// Densities q1 (at +L) and q2 (at -L), constant on the slabs
/// [t_m, t_{m+1}] of the signal grid.
struct EndpointDensities {
    double L = 1.0;
    double T = 1.0;
    std::vector<double> q1;
    std::vector<double> q2;
    /// relative l2 mismatch of the forward map against the input signals
    double roundtrip_error = 0.0;
    /// frequencies dropped as ill-conditioned
    std::size_t skipped_frequencies = 0;

    std::size_t slabs() const { return q1.size(); }
    double dt() const { return T / static_cast<double>(slabs()); }
};

/// The endpoint matrix at a complex frequency s with Re s >= 0, s != 0:
/// (2s)^(-1/2) [[1, e], [e, 1]] with e = exp(-2 L sqrt(s)), principal roots.
inline Eigen::Matrix2cd endpoint_kernel_laplace(Complex s, double L)
{
    if (s == Complex{0.0, 0.0} || s.real() < 0.0) throw std::invalid_argument("endpoint_kernel: need Re s >= 0, s != 0");
    const Complex d = 1.0 / std::sqrt(2.0 * s);
    const Complex o = d * std::exp(-2.0 * L * std::sqrt(s));
    Eigen::Matrix2cd m;
    m << d, o, o, d;
    return m;
}

/// Analytic 2x2 endpoint matrix with entries (2 i tau)^(-1/2) on the diagonal
/// and (2 i tau)^(-1/2) exp(-2 L sqrt(i tau)) off it.
inline Eigen::Matrix2cd endpoint_kernel_ft(double tau, double L)
{
    if (tau == 0.0) throw std::invalid_argument("endpoint_kernel_ft: tau must be nonzero");
    return endpoint_kernel_laplace(Complex(0.0, tau), L);
}

/// det of endpoint_kernel_ft, (2 i tau)^(-1) (1 - exp(-4 L sqrt(i tau))).
inline Complex endpoint_determinant(double tau, double L)
{
    const Complex itau(0.0, tau);
    return (1.0 - std::exp(-4.0 * L * std::sqrt(itau))) / (2.0 * itau);
}

/// Ratio between the transform of the causal kernel
/// chi(t) (4 pi t)^(-1/2) exp(-D^2 / 4t), with hat f(tau) = int f e^{-i tau t} dt,
/// and the matrix entries above.
inline constexpr double kEndpointCalibration = 0.70710678118654752440;  // 1/sqrt(2)

/// Frequency samples s_k = sigma + i tau_k with tau_k = 2 pi (k + 1/2) / P on
/// the padded period P. The half-bin offset keeps tau = 0 off the grid and
/// the set symmetric about 0; sigma > 0 damps the wrap-around of the slowly
/// decaying kernel tail.
struct FrequencyGrid {
    std::vector<double> taus;
    double sigma = 0.0;
    std::size_t padded_length = 0;
    /// raised-cosine taper appended after T, as a fraction of T
    double taper_fraction = 0.1;
};

inline FrequencyGrid make_frequency_grid(const EndpointSignals& s, std::size_t pad_factor = 8, double taper_fraction = 0.1)
{
    validate(s);
    if (pad_factor < 4) throw std::invalid_argument("make_frequency_grid: pad_factor must be >= 4");
    if (!(taper_fraction > 0.0) || taper_fraction > 1.0) throw std::invalid_argument("make_frequency_grid: bad taper");
    std::size_t P = 1;
    while (P < pad_factor * s.nt) P *= 2;
    FrequencyGrid g;
    g.padded_length = P;
    g.taper_fraction = taper_fraction;
    const double period = static_cast<double>(P) * s.dt();
    const double ratio = period / (s.T * (1.0 + taper_fraction));
    // balance wrap-around exp(-sigma (period - T)) against roundoff growth exp(sigma T)
    g.sigma = std::log(1e16) / (s.T * ratio);
    g.taus.resize(P);
    for (std::size_t k = 0; k < P; ++k) {
        const double kk = k < P / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(P);
        g.taus[k] = 2.0 * kPi * (kk + 0.5) / period;
    }
    return g;
}

namespace detail {

// Slab integrals a_j = int_{j dt}^{(j+1) dt} (4 pi tau)^(-1/2) exp(-r2 / 4 tau) dtau.
inline std::vector<double> endpoint_slab_kernel(double r2, double dt, std::size_t n)
{
    std::vector<double> a(n);
    double prev = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double next = heat_time_primitive_1d(r2, dt * static_cast<double>(j + 1)).real();
        a[j] = next - prev;
        prev = next;
    }
    return a;
}

// Damped, half-shifted DFT: X_k = sum_n x_n exp(-(sigma dt + i pi / P) n) exp(-2 pi i k n / P).
inline std::vector<Complex> modulated_fft(const std::vector<Complex>& x, double sigma_dt, int sign)
{
    const std::size_t P = x.size();
    std::vector<Complex> in(P), out(P);
    for (std::size_t n = 0; n < P; ++n) {
        const double nn = static_cast<double>(n);
        in[n] = sign < 0 ? x[n] * std::exp(Complex(-sigma_dt * nn, -kPi * nn / static_cast<double>(P))) : x[n];
    }
    FftwPlan plan(P, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
    plan.run(in, out);
    if (sign > 0) {
        for (std::size_t n = 0; n < P; ++n) {
            const double nn = static_cast<double>(n);
            out[n] *= std::exp(Complex(sigma_dt * nn, kPi * nn / static_cast<double>(P))) / static_cast<double>(P);
        }
    }
    return out;
}

}  // namespace detail

/// Field of the endpoint densities, 1/sqrt(4 pi) int_0^t (q1(s) e^{-(z-L)^2/4(t-s)}
/// + q2(s) e^{-(z+L)^2/4(t-s)}) (t-s)^{-1/2} ds, with exact slab integrals.
inline Complex rep1_eval(const EndpointDensities& q, double t, const ComplexPoint& z)
{
    if (z.dim() != 1) throw std::invalid_argument("rep1_eval: z must be one-dimensional");
    if (!(t > 0.0) || t > q.T * (1.0 + 1e-14)) throw std::invalid_argument("rep1_eval: t outside (0, T]");
    const Complex w = z[0];
    if (w.imag() == 0.0) {
        if (std::abs(w.real()) > q.L) throw std::invalid_argument("rep1_eval: real z outside [-L, L]");
    } else if (std::abs(w.real()) + std::abs(w.imag()) > q.L) {
        throw std::invalid_argument("rep1_eval: complex z outside the closed egg");
    }
    const Complex r2p = (w - q.L) * (w - q.L), r2m = (w + q.L) * (w + q.L);
    const double dt = q.dt();
    Complex sum{0.0, 0.0};
    for (std::size_t m = 0; m < q.slabs(); ++m) {
        const double s0 = dt * static_cast<double>(m);
        if (s0 >= t) break;
        const double s1 = std::min(dt * static_cast<double>(m + 1), t);
        if (q.q1[m] != 0.0) sum += q.q1[m] * detail::slab_kernel(1, r2p, t - s1, t - s0);
        if (q.q2[m] != 0.0) sum += q.q2[m] * detail::slab_kernel(1, r2m, t - s1, t - s0);
    }
    return sum;
}

/// Endpoint values (u(t_n, -L), u(t_n, L)) of the densities at the signal nodes.
inline EndpointSignals endpoint_forward(const EndpointDensities& q)
{
    EndpointSignals s{q.L, q.T, q.slabs() + 1, std::vector<double>(q.slabs() + 1, 0.0),
                      std::vector<double>(q.slabs() + 1, 0.0)};
    parallel_for(q.slabs(), [&](std::size_t m) {
        const double t = s.time(m + 1);
        s.h1[m + 1] = rep1_eval(q, t, ComplexPoint::real({-q.L})).real();
        s.h2[m + 1] = rep1_eval(q, t, ComplexPoint::real({q.L})).real();
    });
    return s;
}

/// Solves the endpoint system frequency by frequency. The 2x2 symbol is the
/// transform of the slab-integrated kernel, which converges to
/// kEndpointCalibration * endpoint_kernel_ft as the step shrinks; using it
/// makes the forward check exact up to the damping and roundoff.
inline EndpointDensities solve_endpoint_densities(const EndpointSignals& s, const FrequencyGrid& grid)
{
    validate(s);
    const std::size_t P = grid.padded_length;
    const std::size_t N = s.nt - 1;  // slabs
    if (grid.taus.size() != P || P < N + 2) throw std::invalid_argument("solve_endpoint_densities: grid does not fit signals");
    const double dt = s.dt();

    // H_n = h(t_{n+1}); after T the last value is tapered to 0 with a raised cosine
    const std::size_t taper = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(grid.taper_fraction * N)));
    if (N + taper >= P) throw std::invalid_argument("solve_endpoint_densities: padding too short for taper");
    auto extend = [&](const std::vector<double>& h) {
        std::vector<Complex> H(P, 0.0);
        for (std::size_t n = 0; n < N; ++n) H[n] = h[n + 1];
        for (std::size_t k = 1; k <= taper; ++k)
            H[N - 1 + k] = h[N] * 0.5 * (1.0 + std::cos(kPi * static_cast<double>(k) / static_cast<double>(taper)));
        return H;
    };
    const double sdt = grid.sigma * dt;
    const auto H1 = detail::modulated_fft(extend(s.h1), sdt, -1);
    const auto H2 = detail::modulated_fft(extend(s.h2), sdt, -1);
    auto as_complex = [](const std::vector<double>& v) { return std::vector<Complex>(v.begin(), v.end()); };
    const auto D = detail::modulated_fft(as_complex(detail::endpoint_slab_kernel(0.0, dt, P)), sdt, -1);
    const auto O = detail::modulated_fft(as_complex(detail::endpoint_slab_kernel(4.0 * s.L * s.L, dt, P)), sdt, -1);

    // u(-L) = O q1 + D q2, u(+L) = D q1 + O q2
    std::vector<Complex> Q1(P), Q2(P);
    std::vector<char> skipped(P, 0);
    parallel_for(P, [&](std::size_t k) {
        const Complex det = D[k] * D[k] - O[k] * O[k];
        if (std::abs(det) < 1e-13 * std::norm(D[k])) {
            skipped[k] = 1;
            return;
        }
        Q1[k] = (D[k] * H2[k] - O[k] * H1[k]) / det;
        Q2[k] = (D[k] * H1[k] - O[k] * H2[k]) / det;
    });
    const auto q1 = detail::modulated_fft(Q1, sdt, +1);
    const auto q2 = detail::modulated_fft(Q2, sdt, +1);

    EndpointDensities out;
    out.L = s.L;
    out.T = s.T;
    out.q1.resize(N);
    out.q2.resize(N);
    for (std::size_t m = 0; m < N; ++m) {
        out.q1[m] = q1[m].real();
        out.q2[m] = q2[m].real();
    }
    for (char c : skipped) out.skipped_frequencies += c;

    const auto fwd = endpoint_forward(out);
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < s.nt; ++n) {
        num += std::pow(fwd.h1[n] - s.h1[n], 2) + std::pow(fwd.h2[n] - s.h2[n], 2);
        den += s.h1[n] * s.h1[n] + s.h2[n] * s.h2[n];
    }
    out.roundtrip_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return out;
}

inline EndpointDensities solve_endpoint_densities(const EndpointSignals& s)
{
    return solve_endpoint_densities(s, make_frequency_grid(s));
}

}  // namespace heatreach
