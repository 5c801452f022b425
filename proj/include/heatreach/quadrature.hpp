#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "heatreach/types.hpp"

namespace heatreach {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

namespace detail {

inline GaussRule compute_gauss_legendre(std::size_t n)
{
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace detail

/// Gauss-Legendre rule with n >= 2 nodes on [-1, 1]; cached per n.
inline const GaussRule& gauss_legendre(std::size_t n)
{
    if (n < 2) throw std::invalid_argument("gauss_legendre: need at least 2 nodes");
    static std::mutex mutex;
    static std::map<std::size_t, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
    return it->second;
}

/// Pairwise (cascade) summation; the reduction order depends only on the
/// length of the input.
template <class T>
T pairwise_sum(const T* data, std::size_t n)
{
    if (n == 0) return T{};
    if (n <= 8) {
        T s = data[0];
        for (std::size_t i = 1; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <class T>
T pairwise_sum(const std::vector<T>& v)
{
    return pairwise_sum(v.data(), v.size());
}

/// Nodes and weights of a composite Gauss-Legendre rule on [a, b].
struct CompositeRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline CompositeRule composite_gauss(double a, double b, std::size_t panels, std::size_t order)
{
    if (panels == 0) throw std::invalid_argument("composite_gauss: panels must be positive");
    const auto& g = gauss_legendre(order);
    CompositeRule out;
    out.nodes.reserve(panels * order);
    out.weights.reserve(panels * order);
    const double h = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double mid = lo + 0.5 * h;
        for (std::size_t k = 0; k < order; ++k) {
            out.nodes.push_back(mid + 0.5 * h * g.nodes[k]);
            out.weights.push_back(0.5 * h * g.weights[k]);
        }
    }
    return out;
}

/// Integrates f over [a, b] with a composite Gauss-Legendre rule.
template <class F>
auto integrate_composite(F&& f, double a, double b, std::size_t panels, std::size_t order = 16)
{
    const auto rule = composite_gauss(a, b, panels, order);
    using R = decltype(f(a));
    std::vector<R> terms(rule.nodes.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = rule.weights[i] * f(rule.nodes[i]);
    return pairwise_sum(terms);
}

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGK15Weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
auto gk15(F& f, double a, double b, double& err_out)
{
    using R = decltype(f(a));
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const R fc = f(c);
    R kron = fc * kGK15Weights[7];
    R gauss = fc * kG7Weights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kGK15Nodes[j];
        const R f1 = f(c - dx);
        const R f2 = f(c + dx);
        kron += (f1 + f2) * kGK15Weights[j];
        if (j % 2 == 1) gauss += (f1 + f2) * kG7Weights[j / 2];
    }
    err_out = std::abs(kron - gauss) * h;
    return R(kron * h);
}

template <class F, class R>
R adaptive_step(F& f, double a, double b, double tol, int depth, R whole, double err, long& budget)
{
    if (err <= tol || depth <= 0 || budget <= 0 || !(b - a > 1e-15 * (std::abs(a) + std::abs(b) + 1.0)))
        return whole;
    budget -= 30;
    const double m = 0.5 * (a + b);
    double el = 0.0, er = 0.0;
    const R left = gk15(f, a, m, el);
    const R right = gk15(f, m, b, er);
    return adaptive_step(f, a, m, 0.5 * tol, depth - 1, left, el, budget) +
           adaptive_step(f, m, b, 0.5 * tol, depth - 1, right, er, budget);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature by recursive bisection. Works for
/// real or complex valued integrands.
template <class F>
auto integrate_adaptive(F f, double a, double b, double abs_tol = 1e-13, int max_depth = 40,
                        long max_evaluations = 200000)
{
    double err = 0.0;
    const auto whole = detail::gk15(f, a, b, err);
    long budget = max_evaluations;
    return detail::adaptive_step(f, a, b, abs_tol, max_depth, whole, err, budget);
}

}  // namespace heatreach
