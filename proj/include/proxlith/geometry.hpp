#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace proxlith {

/// 2-D point / vector in micrometres.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm2() const { return x * x + y * y; }
    bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Axis-aligned rectangle, lo <= hi componentwise.
struct Rect {
    Vec2 lo;
    Vec2 hi;

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double area() const { return width() * height(); }
    Vec2 center() const { return {(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5}; }
    bool degenerate() const { return width() <= 0.0 || height() <= 0.0; }
    bool contains(Vec2 p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
    Rect grown(double gx, double gy) const {
        return {{lo.x - gx, lo.y - gy}, {hi.x + gx, hi.y + gy}};
    }
    Rect grown(double g) const { return grown(g, g); }
};

using Polygon = std::vector<Vec2>;  // CCW vertex order

/// Signed area (positive for CCW).
inline double polygon_signed_area(const Polygon& p) {
    double a = 0.0;
    for (std::size_t i = 0, n = p.size(); i < n; ++i)
        a += cross(p[i], p[(i + 1) % n]);
    return 0.5 * a;
}

inline double polygon_area(const Polygon& p) { return std::abs(polygon_signed_area(p)); }

inline Vec2 polygon_centroid(const Polygon& p) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0, n = p.size(); i < n; ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % n];
        double w = cross(u, v);
        a += w;
        cx += (u.x + v.x) * w;
        cy += (u.y + v.y) * w;
    }
    a *= 0.5;
    if (a == 0.0) throw std::invalid_argument("polygon_centroid: degenerate polygon");
    return {cx / (6.0 * a), cy / (6.0 * a)};
}

/// True if p lies at inward distance >= inset from every edge of a CCW convex
/// polygon. inset = 0 tests plain membership (boundary counts as inside).
inline bool point_in_convex(Vec2 p, const Polygon& poly, double inset = 0.0) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = poly[i];
        Vec2 b = poly[(i + 1) % n];
        Vec2 e = b - a;
        double len = norm(e);
        if (len == 0.0) continue;
        // inward signed distance for CCW orientation
        double d = cross(e, p - a) / len;
        if (d < inset) return false;
    }
    return true;
}

/// Clip a polygon against the half-plane on the left of a->b (keeps CCW).
inline Polygon clip_halfplane(const Polygon& poly, Vec2 a, Vec2 b) {
    Polygon out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    Vec2 e = b - a;
    auto side = [&](Vec2 p) { return cross(e, p - a); };
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 cur = poly[i];
        Vec2 nxt = poly[(i + 1) % n];
        double sc = side(cur), sn = side(nxt);
        if (sc >= 0.0) out.push_back(cur);
        if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
            double t = sc / (sc - sn);
            out.push_back(cur + (nxt - cur) * t);
        }
    }
    return out;
}

/// Intersection of a polygon with a CCW convex clipper (Sutherland-Hodgman).
inline Polygon clip_convex(const Polygon& subject, const Polygon& clipper) {
    Polygon out = subject;
    const std::size_t n = clipper.size();
    for (std::size_t i = 0; i < n && !out.empty(); ++i)
        out = clip_halfplane(out, clipper[i], clipper[(i + 1) % n]);
    return out;
}

inline Polygon rect_polygon(const Rect& r) {
    return {{r.lo.x, r.lo.y}, {r.hi.x, r.lo.y}, {r.hi.x, r.hi.y}, {r.lo.x, r.hi.y}};
}

inline Polygon clip_to_rect(const Polygon& subject, const Rect& r) {
    return clip_convex(subject, rect_polygon(r));
}

/// Area of the intersection of two convex CCW polygons.
inline double convex_intersection_area(const Polygon& a, const Polygon& b) {
    Polygon c = clip_convex(a, b);
    return c.size() < 3 ? 0.0 : polygon_area(c);
}

namespace detail {

// Chord length of the disc's vertical slice at offset t, clipped to y <= yc.
inline double disc_slice_below(double t, double yc, double r) {
    double w2 = r * r - t * t;
    if (w2 <= 0.0) return 0.0;
    double w = std::sqrt(w2);
    double top = std::min(yc, w);
    double bot = -w;
    return top > bot ? top - bot : 0.0;
}

inline double simpson(double (*f)(double, double, double), double a, double b,
                      double yc, double r) {
    double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a, yc, r) + 4.0 * f(m, yc, r) + f(b, yc, r));
}

inline double adaptive(double (*f)(double, double, double), double a, double b,
                       double yc, double r, double whole, double eps, int depth) {
    double m = 0.5 * (a + b);
    double left = simpson(f, a, m, yc, r);
    double right = simpson(f, m, b, yc, r);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(f, a, m, yc, r, left, eps * 0.5, depth - 1) +
           adaptive(f, m, b, yc, r, right, eps * 0.5, depth - 1);
}

}  // namespace detail

/// Area of disc(center, r) intersected with an axis-aligned rectangle.
/// Exact for the fully-inside / fully-outside cases; adaptive quadrature
/// (abs. tolerance ~1e-12 * r^2) for partial overlap.
inline double circle_rect_area(Vec2 center, double r, const Rect& rect) {
    if (r <= 0.0 || rect.degenerate()) return 0.0;
    // fully inside
    if (center.x - r >= rect.lo.x && center.x + r <= rect.hi.x &&
        center.y - r >= rect.lo.y && center.y + r <= rect.hi.y)
        return M_PI * r * r;
    // no overlap (bounding test)
    if (center.x + r <= rect.lo.x || center.x - r >= rect.hi.x ||
        center.y + r <= rect.lo.y || center.y - r >= rect.hi.y)
        return 0.0;

    // area = integral over x of slice(y in [lo.y, hi.y]) inside disc
    //      = integral of (slice below hi.y) - (slice below lo.y)
    auto piece = [&](double yc) {
        double a = std::max(rect.lo.x, center.x - r) - center.x;
        double b = std::min(rect.hi.x, center.x + r) - center.x;
        if (b <= a) return 0.0;
        double yoff = yc - center.y;
        double whole = detail::simpson(detail::disc_slice_below, a, b, yoff, r);
        return detail::adaptive(detail::disc_slice_below, a, b, yoff, r, whole,
                                1e-12 * r * r, 48);
    };
    double area = piece(rect.hi.y) - piece(rect.lo.y);
    return std::max(area, 0.0);
}

}  // namespace proxlith
