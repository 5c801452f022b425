#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "heatreach/geometry.hpp"
#include "heatreach/types.hpp"

namespace heatreach {

/// Snapshots u(t_k, x_j) of a finite-difference solve, stored row-major by
/// time.
struct FieldSample {
    DomainSpec domain;
    std::vector<double> times;
    std::vector<RealVector> spatial_grid;
    /// false for grid points on the boundary
    std::vector<bool> interior;
    std::vector<Complex> values;

    std::size_t size() const { return spatial_grid.size(); }
    Complex at(std::size_t time_index, std::size_t point) const { return values[time_index * size() + point]; }

    std::size_t time_index(double t) const
    {
        const double tol = 1e-12 * std::max(1.0, times.empty() ? 1.0 : std::abs(times.back()));
        for (std::size_t k = 0; k < times.size(); ++k)
            if (std::abs(times[k] - t) <= tol) return k;
        throw std::invalid_argument("FieldSample: time not sampled");
    }
};

using SpatialFunction = std::function<Complex(const RealVector&)>;
using BoundaryFunction = std::function<Complex(double, const RealVector&)>;

/// Largest |a(t, x) - b(x)| over interior grid points.
inline double sup_error(const FieldSample& a, const SpatialFunction& b, double t)
{
    const std::size_t k = a.time_index(t);
    double err = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a.interior[j]) err = std::max(err, std::abs(a.at(k, j) - b(a.spatial_grid[j])));
    return err;
}

namespace detail {

// Thomas algorithm; overwrites rhs with the solution.
inline void solve_tridiagonal(const std::vector<Complex>& lower, const std::vector<Complex>& diag,
                              const std::vector<Complex>& upper, std::vector<Complex>& rhs)
{
    const std::size_t n = diag.size();
    if (n == 0) return;
    std::vector<Complex> c(n);
    Complex beta = diag[0];
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        c[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i + 1] * rhs[i + 1];
}

inline bool stored_step(std::size_t n, std::size_t nt, std::size_t stride)
{
    return n == 0 || n == nt || (stride > 0 && n % stride == 0);
}

}  // namespace detail

/// Crank-Nicolson on a uniform grid of [a, b] with nx cells. u0 holds the
/// nx + 1 nodal values, h the (left, right) Dirichlet values at t_n = n T / nt
/// for n = 0..nt. Snapshots are kept every `stride` steps (0: first and last
/// only).
inline FieldSample crank_nicolson_interval(const Interval& iv, const std::vector<Complex>& u0,
                                           const std::vector<std::array<Complex, 2>>& h, double T, std::size_t nt,
                                           std::size_t stride = 0)
{
    validate(iv);
    if (!(T > 0.0) || nt < 1) throw std::invalid_argument("crank_nicolson: need T > 0 and nt >= 1");
    if (u0.size() < 3) throw std::invalid_argument("crank_nicolson: need at least 2 cells");
    if (h.size() != nt + 1) throw std::invalid_argument("crank_nicolson: boundary data needs nt + 1 samples");
    const double corner_tol = 1e-8 * std::max(1.0, std::max(std::abs(u0.front()), std::abs(u0.back())));
    if (std::abs(u0.front() - h[0][0]) > corner_tol || std::abs(u0.back() - h[0][1]) > corner_tol)
        throw std::invalid_argument("crank_nicolson: initial and boundary data incompatible at the corners");

    const std::size_t nx = u0.size() - 1;
    const double dx = (iv.b - iv.a) / static_cast<double>(nx);
    const double dt = T / static_cast<double>(nt);
    const double r = 0.5 * dt / (dx * dx);

    FieldSample out;
    out.domain = iv;
    for (std::size_t i = 0; i <= nx; ++i) {
        out.spatial_grid.push_back({iv.a + dx * static_cast<double>(i)});
        out.interior.push_back(i != 0 && i != nx);
    }
    out.spatial_grid.back()[0] = iv.b;

    std::vector<Complex> u = u0;
    const std::size_t m = nx - 1;
    const std::vector<Complex> lower(m, -r), diag(m, 1.0 + 2.0 * r), upper(m, -r);
    std::vector<Complex> rhs(m);
    auto store = [&](std::size_t n) {
        out.times.push_back(n == nt ? T : dt * static_cast<double>(n));
        out.values.insert(out.values.end(), u.begin(), u.end());
    };
    store(0);
    for (std::size_t n = 0; n < nt; ++n) {
        for (std::size_t i = 1; i < nx; ++i) rhs[i - 1] = u[i] + r * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
        rhs.front() += r * h[n + 1][0];
        rhs.back() += r * h[n + 1][1];
        detail::solve_tridiagonal(lower, diag, upper, rhs);
        u[0] = h[n + 1][0];
        u[nx] = h[n + 1][1];
        for (std::size_t i = 1; i < nx; ++i) u[i] = rhs[i - 1];
        if (detail::stored_step(n + 1, nt, stride)) store(n + 1);
    }
    return out;
}

/// Same, on an explicit grid which must be uniform and span the interval.
inline FieldSample crank_nicolson_interval(const Interval& iv, const RealVector& x, const std::vector<Complex>& u0,
                                           const std::vector<std::array<Complex, 2>>& h, double T, std::size_t nt,
                                           std::size_t stride = 0)
{
    if (x.size() != u0.size() || x.size() < 3) throw std::invalid_argument("crank_nicolson: grid/data size mismatch");
    const double dx = (iv.b - iv.a) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - (iv.a + dx * static_cast<double>(i))) > 1e-12 * (iv.b - iv.a))
            throw std::invalid_argument("crank_nicolson: grid must be uniform and span the interval");
    return crank_nicolson_interval(iv, u0, h, T, nt, stride);
}

/// Polar grid for the disk solver: cell-centred radii r_i = (i - 1/2) dr,
/// i = 1..nr, with dr = R / (nr + 1/2) so that r_{nr+1} = R, and nθ uniform
/// angles.
struct PolarGrid {
    RealVector center;
    double R = 1.0;
    std::size_t nr = 16;
    std::size_t ntheta = 32;

    double dr() const { return R / (static_cast<double>(nr) + 0.5); }
    double radius(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dr(); }  // 0-based
    double angle(std::size_t j) const { return 2.0 * kPi * static_cast<double>(j) / static_cast<double>(ntheta); }
    RealVector point(std::size_t i, std::size_t j) const
    {
        return {center[0] + radius(i) * std::cos(angle(j)), center[1] + radius(i) * std::sin(angle(j))};
    }
    RealVector boundary_point(std::size_t j) const
    {
        return {center[0] + R * std::cos(angle(j)), center[1] + R * std::sin(angle(j))};
    }
};

namespace detail {

class FftwPlan {
public:
    FftwPlan(std::size_t n, int sign) : n_(n)
    {
        in_ = fftw_alloc_complex(n);
        out_ = fftw_alloc_complex(n);
        {
            std::lock_guard lock(planner_mutex());
            plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, sign, FFTW_ESTIMATE);
        }
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    ~FftwPlan()
    {
        {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }

    template <class In, class Out>
    void run(const In& in, Out& out)
    {
        for (std::size_t k = 0; k < n_; ++k) {
            in_[k][0] = in[k].real();
            in_[k][1] = in[k].imag();
        }
        fftw_execute(plan_);
        for (std::size_t k = 0; k < n_; ++k) out[k] = Complex(out_[k][0], out_[k][1]);
    }

    // The FFTW planner is not thread safe; execution is.
    static std::mutex& planner_mutex()
    {
        static std::mutex m;
        return m;
    }

private:
    std::size_t n_;
    fftw_complex* in_;
    fftw_complex* out_;
    fftw_plan plan_;
};

}  // namespace detail

/// Crank-Nicolson on a disk: Fourier modes in θ, each advanced with a
/// conservative radial stencil that is regular at the origin. u0 is indexed
/// [i * ntheta + j] over the polar grid, h is [n * ntheta + j] over the
/// boundary angles at t_n = n T / nt.
inline FieldSample crank_nicolson_disk(const PolarGrid& pg, const std::vector<Complex>& u0,
                                       const std::vector<Complex>& h, double T, std::size_t nt,
                                       std::size_t stride = 0)
{
    if (pg.center.size() != 2 || !(pg.R > 0.0)) throw std::invalid_argument("crank_nicolson_disk: bad geometry");
    if (pg.nr < 16 || pg.ntheta < 4 || pg.ntheta % 2 != 0)
        throw std::invalid_argument("crank_nicolson_disk: need nr >= 16 and an even ntheta");
    if (!(T > 0.0) || nt < 1) throw std::invalid_argument("crank_nicolson_disk: need T > 0 and nt >= 1");
    const std::size_t nr = pg.nr, nth = pg.ntheta;
    if (u0.size() != nr * nth || h.size() != (nt + 1) * nth)
        throw std::invalid_argument("crank_nicolson_disk: data size mismatch");

    const double dr = pg.dr(), dt = T / static_cast<double>(nt);
    FieldSample out;
    out.domain = Ball{pg.center, pg.R, 2};
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nth; ++j) {
            out.spatial_grid.push_back(pg.point(i, j));
            out.interior.push_back(true);
        }

    detail::FftwPlan forward(nth, FFTW_FORWARD), backward(nth, FFTW_BACKWARD);
    // modal coefficients c[m][i]
    std::vector<std::vector<Complex>> modes(nth, std::vector<Complex>(nr));
    std::vector<Complex> row(nth), spec(nth);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j < nth; ++j) row[j] = u0[i * nth + j];
        forward.run(row, spec);
        for (std::size_t m = 0; m < nth; ++m) modes[m][i] = spec[m] / static_cast<double>(nth);
    }
    auto boundary_modes = [&](std::size_t n) {
        for (std::size_t j = 0; j < nth; ++j) row[j] = h[n * nth + j];
        std::vector<Complex> b(nth);
        forward.run(row, b);
        for (auto& v : b) v /= static_cast<double>(nth);
        return b;
    };

    // radial operator coefficients: L u_i = a_i u_{i-1} + d_i u_i + c_i u_{i+1}
    std::vector<double> lo(nr), di(nr), up(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        const double r = pg.radius(i);
        const double rm = r - 0.5 * dr, rp = r + 0.5 * dr;  // rm = 0 at the first cell
        lo[i] = rm / (r * dr * dr);
        up[i] = rp / (r * dr * dr);
        di[i] = -(rm + rp) / (r * dr * dr);
    }

    std::vector<Complex> values(nr * nth);
    auto store = [&](std::size_t n) {
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t m = 0; m < nth; ++m) spec[m] = modes[m][i];
            backward.run(spec, row);
            for (std::size_t j = 0; j < nth; ++j) values[i * nth + j] = row[j];
        }
        out.times.push_back(n == nt ? T : dt * static_cast<double>(n));
        out.values.insert(out.values.end(), values.begin(), values.end());
    };
    store(0);

    std::vector<Complex> bprev = boundary_modes(0);
    std::vector<Complex> L(nr), D(nr), U(nr), rhs(nr);
    for (std::size_t n = 0; n < nt; ++n) {
        const std::vector<Complex> bnext = boundary_modes(n + 1);
        for (std::size_t m = 0; m < nth; ++m) {
            const double k = m <= nth / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(nth);
            auto& c = modes[m];
            for (std::size_t i = 0; i < nr; ++i) {
                const double r = pg.radius(i);
                const double diag = di[i] - k * k / (r * r);
                Complex lu = diag * c[i];
                if (i > 0) lu += lo[i] * c[i - 1];
                if (i + 1 < nr) lu += up[i] * c[i + 1];
                rhs[i] = c[i] + 0.5 * dt * lu;
                L[i] = -0.5 * dt * lo[i];
                D[i] = 1.0 - 0.5 * dt * diag;
                U[i] = -0.5 * dt * up[i];
            }
            rhs[nr - 1] += 0.5 * dt * up[nr - 1] * (bprev[m] + bnext[m]);
            detail::solve_tridiagonal(L, D, U, rhs);
            c = rhs;
        }
        bprev = bnext;
        if (detail::stored_step(n + 1, nt, stride)) store(n + 1);
    }
    return out;
}

/// Convenience front end: samples u0 and h on the solver grid. For an
/// interval nx is the cell count; for a disk nx is the radial count and
/// ntheta the angular count.
inline FieldSample crank_nicolson_solve(const DomainSpec& domain, const SpatialFunction& u0, const BoundaryFunction& h,
                                        double T, std::size_t nt, std::size_t nx, std::size_t ntheta = 64,
                                        std::size_t stride = 0)
{
    validate(domain);
    const double dt = T / static_cast<double>(nt);
    if (const auto* iv = std::get_if<Interval>(&domain)) {
        if (nx < 2) throw std::invalid_argument("crank_nicolson: need nx >= 2");
        std::vector<Complex> init(nx + 1);
        const double dx = (iv->b - iv->a) / static_cast<double>(nx);
        for (std::size_t i = 0; i <= nx; ++i) init[i] = u0({i == nx ? iv->b : iv->a + dx * static_cast<double>(i)});
        std::vector<std::array<Complex, 2>> bd(nt + 1);
        for (std::size_t n = 0; n <= nt; ++n) {
            const double t = n == nt ? T : dt * static_cast<double>(n);
            bd[n] = {h(t, {iv->a}), h(t, {iv->b})};
        }
        return crank_nicolson_interval(*iv, init, bd, T, nt, stride);
    }
    if (const auto* ball = std::get_if<Ball>(&domain)) {
        if (ball->dim == 1) {
            return crank_nicolson_solve(Interval{ball->center[0] - ball->radius, ball->center[0] + ball->radius}, u0, h, T,
                                        nt, nx, ntheta, stride);
        }
        if (ball->dim != 2) throw std::invalid_argument("crank_nicolson: only d = 1, 2 are supported");
        const PolarGrid pg{ball->center, ball->radius, nx, ntheta};
        std::vector<Complex> init(nx * ntheta), bd((nt + 1) * ntheta);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ntheta; ++j) init[i * ntheta + j] = u0(pg.point(i, j));
        for (std::size_t n = 0; n <= nt; ++n) {
            const double t = n == nt ? T : dt * static_cast<double>(n);
            for (std::size_t j = 0; j < ntheta; ++j) bd[n * ntheta + j] = h(t, pg.boundary_point(j));
        }
        return crank_nicolson_disk(pg, init, bd, T, nt, stride);
    }
    throw std::invalid_argument("crank_nicolson: polygons are not supported");
}

}  // namespace heatreach
