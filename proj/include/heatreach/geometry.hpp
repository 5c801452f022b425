#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "heatreach/types.hpp"

namespace heatreach {

struct Interval {
    double a = -1.0;
    double b = 1.0;
};

struct Ball {
    RealVector center;
    double radius = 1.0;
    int dim = 1;
};

/// Simple, positively oriented planar polygon.
struct Polygon {
    std::vector<std::array<double, 2>> vertices;
};

using DomainSpec = std::variant<Interval, Ball, Polygon>;

namespace detail {

inline double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b)
{
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline bool segments_intersect(const std::array<double, 2>& p1, const std::array<double, 2>& p2,
                               const std::array<double, 2>& q1, const std::array<double, 2>& q2)
{
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on_segment = [](const auto& a, const auto& b, const auto& c) {
        return std::min(a[0], b[0]) <= c[0] && c[0] <= std::max(a[0], b[0]) &&
               std::min(a[1], b[1]) <= c[1] && c[1] <= std::max(a[1], b[1]);
    };
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

inline double signed_area(const Polygon& poly)
{
    double area = 0.0;
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % v.size()];
        area += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * area;
}

/// Closest point on segment [p, q] to x.
inline std::array<double, 2> closest_on_segment(const std::array<double, 2>& p,
                                                const std::array<double, 2>& q, double x0,
                                                double x1)
{
    const double ex = q[0] - p[0];
    const double ey = q[1] - p[1];
    const double len2 = ex * ex + ey * ey;
    double s = ((x0 - p[0]) * ex + (x1 - p[1]) * ey) / len2;
    s = std::clamp(s, 0.0, 1.0);
    return {p[0] + s * ex, p[1] + s * ey};
}

// Even-odd crossing test; boundary points are handled by the caller.
inline bool polygon_interior(const Polygon& poly, double x0, double x1)
{
    bool inside = false;
    const auto& v = poly.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if (((v[i][1] > x1) != (v[j][1] > x1)) &&
            (x0 < (v[j][0] - v[i][0]) * (x1 - v[i][1]) / (v[j][1] - v[i][1]) + v[i][0]))
            inside = !inside;
    }
    return inside;
}

}  // namespace detail

inline int dimension(const DomainSpec& domain)
{
    return std::visit(
        [](const auto& d) -> int {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Interval>) return 1;
            else if constexpr (std::is_same_v<D, Ball>) return d.dim;
            else return 2;
        },
        domain);
}

/// Throws std::invalid_argument if the domain violates its invariants.
inline void validate(const DomainSpec& domain)
{
    std::visit(
        [](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Interval>) {
                if (!(d.a < d.b)) throw std::invalid_argument("Interval: requires a < b");
            } else if constexpr (std::is_same_v<D, Ball>) {
                if (!(d.radius > 0.0)) throw std::invalid_argument("Ball: radius must be positive");
                if (d.dim < 1) throw std::invalid_argument("Ball: dimension must be >= 1");
                if (d.center.size() != static_cast<std::size_t>(d.dim))
                    throw std::invalid_argument("Ball: center length must equal dimension");
            } else {
                const auto& v = d.vertices;
                if (v.size() < 3) throw std::invalid_argument("Polygon: needs at least 3 vertices");
                if (!(detail::signed_area(d) > 0.0))
                    throw std::invalid_argument("Polygon: vertices must be positively oriented");
                const std::size_t n = v.size();
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = i + 1; j < n; ++j) {
                        // adjacent edges share a vertex
                        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
                        if (detail::segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                            throw std::invalid_argument("Polygon: edges intersect (not simple)");
                    }
                }
            }
        },
        domain);
}

struct BoundaryDistance {
    double distance = 0.0;
    /// true when the query point lies outside the closure of the domain
    bool exterior = false;
};

inline BoundaryDistance distance_to_boundary(const DomainSpec& domain, std::span<const double> x)
{
    if (x.size() != static_cast<std::size_t>(dimension(domain)))
        throw std::invalid_argument("distance_to_boundary: dimension mismatch");
    return std::visit(
        [&](const auto& d) -> BoundaryDistance {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Interval>) {
                const double p = x[0];
                if (p < d.a) return {d.a - p, true};
                if (p > d.b) return {p - d.b, true};
                return {std::min(p - d.a, d.b - p), false};
            } else if constexpr (std::is_same_v<D, Ball>) {
                double r2 = 0.0;
                for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - d.center[k]) * (x[k] - d.center[k]);
                const double r = std::sqrt(r2);
                if (r > d.radius) return {r - d.radius, true};
                return {d.radius - r, false};
            } else {
                const auto& v = d.vertices;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < v.size(); ++i) {
                    const auto c = detail::closest_on_segment(v[i], v[(i + 1) % v.size()], x[0], x[1]);
                    best = std::min(best, std::hypot(x[0] - c[0], x[1] - c[1]));
                }
                if (best == 0.0) return {0.0, false};
                return {best, !detail::polygon_interior(d, x[0], x[1])};
            }
        },
        domain);
}

/// Nearest point of the boundary to x.
inline RealVector nearest_boundary_point(const DomainSpec& domain, std::span<const double> x)
{
    if (x.size() != static_cast<std::size_t>(dimension(domain)))
        throw std::invalid_argument("nearest_boundary_point: dimension mismatch");
    return std::visit(
        [&](const auto& d) -> RealVector {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Interval>) {
                return {std::abs(x[0] - d.a) <= std::abs(x[0] - d.b) ? d.a : d.b};
            } else if constexpr (std::is_same_v<D, Ball>) {
                RealVector diff(x.size());
                for (std::size_t k = 0; k < x.size(); ++k) diff[k] = x[k] - d.center[k];
                double r = norm(diff);
                RealVector out(x.size());
                if (r == 0.0) {
                    // every boundary point is nearest; pick the first axis
                    out = d.center;
                    out[0] += d.radius;
                    return out;
                }
                for (std::size_t k = 0; k < x.size(); ++k) out[k] = d.center[k] + d.radius * diff[k] / r;
                return out;
            } else {
                const auto& v = d.vertices;
                double best = std::numeric_limits<double>::infinity();
                std::array<double, 2> arg{};
                for (std::size_t i = 0; i < v.size(); ++i) {
                    const auto c = detail::closest_on_segment(v[i], v[(i + 1) % v.size()], x[0], x[1]);
                    const double dist = std::hypot(x[0] - c[0], x[1] - c[1]);
                    if (dist < best) {
                        best = dist;
                        arg = c;
                    }
                }
                return {arg[0], arg[1]};
            }
        },
        domain);
}

/// Unit vector pointing from x out of the domain through its nearest
/// boundary point. For boundary points this is the outward normal of the
/// nearest boundary piece.
inline RealVector outward_direction(const DomainSpec& domain, std::span<const double> x)
{
    const auto bd = distance_to_boundary(domain, x);
    const RealVector b = nearest_boundary_point(domain, x);
    RealVector dir(x.size());
    if (bd.distance > 0.0) {
        const double sign = bd.exterior ? -1.0 : 1.0;
        for (std::size_t k = 0; k < x.size(); ++k) dir[k] = sign * (b[k] - x[k]) / bd.distance;
        return dir;
    }
    return std::visit(
        [&](const auto& d) -> RealVector {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Interval>) {
                return {x[0] <= d.a ? -1.0 : 1.0};
            } else if constexpr (std::is_same_v<D, Ball>) {
                RealVector out(x.size());
                for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - d.center[k]) / d.radius;
                return out;
            } else {
                const auto& v = d.vertices;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    const auto& p = v[i];
                    const auto& q = v[(i + 1) % v.size()];
                    const auto c = detail::closest_on_segment(p, q, x[0], x[1]);
                    if (std::hypot(x[0] - c[0], x[1] - c[1]) == 0.0) {
                        const double ex = q[0] - p[0];
                        const double ey = q[1] - p[1];
                        const double len = std::hypot(ex, ey);
                        // counterclockwise orientation: outward normal is (ey, -ex)
                        return {ey / len, -ex / len};
                    }
                }
                throw std::logic_error("outward_direction: boundary point not found");
            }
        },
        domain);
}

enum class EggMode { open, closed };

/// Membership in E(Omega) = { x + iy : x in Omega, |y| < dist(x, dOmega) }.
/// The closed mode uses <= and admits x on the boundary.
inline bool egg_contains(const DomainSpec& domain, const ComplexPoint& z, EggMode mode)
{
    if (z.dim() != static_cast<std::size_t>(dimension(domain)))
        throw std::invalid_argument("egg_contains: dimension mismatch");
    const auto bd = distance_to_boundary(domain, z.re);
    if (bd.exterior) return false;
    const double y = z.imag_norm();
    if (mode == EggMode::open) return bd.distance > 0.0 && y < bd.distance;
    return y <= bd.distance;
}

/// Largest distance to the boundary over the domain (radius of the largest
/// inscribed ball), used to validate compact-subset margins.
inline double inradius(const DomainSpec& domain)
{
    return std::visit(
        [](const auto& d) -> double {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Interval>) {
                return 0.5 * (d.b - d.a);
            } else if constexpr (std::is_same_v<D, Ball>) {
                return d.radius;
            } else {
                double xmin = d.vertices[0][0], xmax = xmin, ymin = d.vertices[0][1], ymax = ymin;
                for (const auto& v : d.vertices) {
                    xmin = std::min(xmin, v[0]);
                    xmax = std::max(xmax, v[0]);
                    ymin = std::min(ymin, v[1]);
                    ymax = std::max(ymax, v[1]);
                }
                // grid search, refined once around the best cell
                const DomainSpec dom{d};
                double best = 0.0;
                double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
                double hx = xmax - xmin, hy = ymax - ymin;
                for (int level = 0; level < 6; ++level) {
                    const int n = 40;
                    double bx = cx, by = cy;
                    for (int i = 0; i <= n; ++i) {
                        for (int j = 0; j <= n; ++j) {
                            const double px = cx - 0.5 * hx + hx * i / n;
                            const double py = cy - 0.5 * hy + hy * j / n;
                            const RealVector p{px, py};
                            const auto bd = distance_to_boundary(dom, p);
                            if (!bd.exterior && bd.distance > best) {
                                best = bd.distance;
                                bx = px;
                                by = py;
                            }
                        }
                    }
                    cx = bx;
                    cy = by;
                    hx *= 0.1;
                    hy *= 0.1;
                }
                return best;
            }
        },
        domain);
}

struct SampleCounts {
    /// grid points per real axis
    std::size_t real_points = 5;
    /// imaginary radii per real point (d = 1: symmetric values in [-r, r])
    std::size_t imag_points = 5;
    /// imaginary directions (d = 2 only)
    std::size_t imag_directions = 8;
};

/// Deterministic sample of the compact set
/// { z : Re z in Omega, |Im z| <= dist(Re z, dOmega) - margin }.
inline std::vector<ComplexPoint> sample_compact_subset(const DomainSpec& domain, double margin,
                                                       const SampleCounts& counts)
{
    validate(domain);
    if (!(margin > 0.0)) throw std::invalid_argument("sample_compact_subset: margin must be positive");
    if (margin >= inradius(domain))
        throw std::invalid_argument("sample_compact_subset: margin leaves an empty compact set");
    if (counts.real_points == 0 || counts.imag_points == 0)
        throw std::invalid_argument("sample_compact_subset: counts must be positive");

    const int d = dimension(domain);
    auto lin = [](double lo, double hi, std::size_t n, std::size_t i) {
        return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    };

    std::vector<ComplexPoint> out;
    if (d == 1) {
        double lo = 0.0, hi = 0.0;
        if (const auto* iv = std::get_if<Interval>(&domain)) {
            lo = iv->a;
            hi = iv->b;
        } else {
            const auto& b = std::get<Ball>(domain);
            lo = b.center[0] - b.radius;
            hi = b.center[0] + b.radius;
        }
        for (std::size_t i = 0; i < counts.real_points; ++i) {
            const double x = lin(lo + margin, hi - margin, counts.real_points, i);
            double r = distance_to_boundary(domain, RealVector{x}).distance - margin;
            if (r < -1e-12) continue;
            r = std::max(r, 0.0);  // rounding at the grid ends
            for (std::size_t j = 0; j < counts.imag_points; ++j) {
                const double y = lin(-r, r, counts.imag_points, j);
                out.push_back(ComplexPoint{{x}, {y}});
            }
        }
    } else if (d == 2) {
        double xmin, xmax, ymin, ymax;
        if (const auto* b = std::get_if<Ball>(&domain)) {
            xmin = b->center[0] - b->radius;
            xmax = b->center[0] + b->radius;
            ymin = b->center[1] - b->radius;
            ymax = b->center[1] + b->radius;
        } else {
            const auto& v = std::get<Polygon>(domain).vertices;
            xmin = xmax = v[0][0];
            ymin = ymax = v[0][1];
            for (const auto& p : v) {
                xmin = std::min(xmin, p[0]);
                xmax = std::max(xmax, p[0]);
                ymin = std::min(ymin, p[1]);
                ymax = std::max(ymax, p[1]);
            }
        }
        for (std::size_t i = 0; i < counts.real_points; ++i) {
            for (std::size_t j = 0; j < counts.real_points; ++j) {
                const RealVector x{lin(xmin, xmax, counts.real_points, i), lin(ymin, ymax, counts.real_points, j)};
                const auto bd = distance_to_boundary(domain, x);
                if (bd.exterior) continue;
                const double r = bd.distance - margin;
                if (r < 0.0) continue;
                out.push_back(ComplexPoint::real(x));
                if (counts.imag_points < 2) continue;
                for (std::size_t k = 1; k < counts.imag_points; ++k) {
                    const double rho = r * static_cast<double>(k) / static_cast<double>(counts.imag_points - 1);
                    for (std::size_t l = 0; l < counts.imag_directions; ++l) {
                        const double th = 2.0 * kPi * static_cast<double>(l) / static_cast<double>(counts.imag_directions);
                        out.push_back(ComplexPoint{x, {rho * std::cos(th), rho * std::sin(th)}});
                    }
                }
            }
        }
        if (out.empty()) {
            throw std::invalid_argument("sample_compact_subset: grid too coarse for margin");
        }
    } else {
        throw std::invalid_argument("sample_compact_subset: only d = 1, 2 are supported");
    }
    return out;
}

}  // namespace heatreach
