#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxlith/geometry.hpp"

namespace proxlith {

enum class ApertureShape { TriangleUp, TriangleDown, Square, Hexagon, Circle };

enum class LatticeKind {
    TriangularGapless,  // edge-sharing equilateral triangles, rows alternate up/down
    SquareGapless,      // edge-sharing axis-aligned squares
    HexGapless,         // honeycomb of flat-top hexagons
    SquareLattice,      // circles on a square lattice
    HexLattice          // circles on a hexagonal lattice
};

/// Which apertures a generator emits for a finite region.
enum class InclusionRule {
    FullInside,     // whole polygon (or disc) within the region
    CentroidInside  // centroid within the region
};

enum class LensFootprint { AsAperture, InscribedCircle };

/// One aperture: a regular polygon (or disc) given by circumcenter,
/// circumradius and orientation.
struct ApertureSpec {
    ApertureShape shape = ApertureShape::TriangleUp;
    double circumradius = 0.0;  // um
    Vec2 center{};
    double orientation = 0.0;  // radians

    bool is_circle() const { return shape == ApertureShape::Circle; }
};

inline const char* shape_tag(ApertureShape s) {
    switch (s) {
        case ApertureShape::TriangleUp: return "triangle_up";
        case ApertureShape::TriangleDown: return "triangle_down";
        case ApertureShape::Square: return "square";
        case ApertureShape::Hexagon: return "hexagon";
        case ApertureShape::Circle: return "circle";
    }
    return "?";
}

inline std::optional<ApertureShape> shape_from_tag(const std::string& t) {
    if (t == "triangle_up") return ApertureShape::TriangleUp;
    if (t == "triangle_down") return ApertureShape::TriangleDown;
    if (t == "square") return ApertureShape::Square;
    if (t == "hexagon") return ApertureShape::Hexagon;
    if (t == "circle") return ApertureShape::Circle;
    return std::nullopt;
}

inline const char* lattice_tag(LatticeKind k) {
    switch (k) {
        case LatticeKind::TriangularGapless: return "triangular_gapless";
        case LatticeKind::SquareGapless: return "square_gapless";
        case LatticeKind::HexGapless: return "hex_gapless";
        case LatticeKind::SquareLattice: return "square_lattice";
        case LatticeKind::HexLattice: return "hex_lattice";
    }
    return "?";
}

inline std::optional<LatticeKind> lattice_from_tag(const std::string& t) {
    if (t == "triangular_gapless") return LatticeKind::TriangularGapless;
    if (t == "square_gapless") return LatticeKind::SquareGapless;
    if (t == "hex_gapless") return LatticeKind::HexGapless;
    if (t == "square_lattice") return LatticeKind::SquareLattice;
    if (t == "hex_lattice") return LatticeKind::HexLattice;
    return std::nullopt;
}

inline std::size_t vertex_count(ApertureShape s) {
    switch (s) {
        case ApertureShape::TriangleUp:
        case ApertureShape::TriangleDown: return 3;
        case ApertureShape::Square: return 4;
        case ApertureShape::Hexagon: return 6;
        case ApertureShape::Circle: return 0;
    }
    return 0;
}

/// Distance from center to edge midpoint.
inline double inradius(ApertureShape s, double circumradius) {
    switch (s) {
        case ApertureShape::TriangleUp:
        case ApertureShape::TriangleDown: return 0.5 * circumradius;
        case ApertureShape::Square: return circumradius / std::sqrt(2.0);
        case ApertureShape::Hexagon: return circumradius * std::sqrt(3.0) / 2.0;
        case ApertureShape::Circle: return circumradius;
    }
    return 0.0;
}

/// CCW vertices. Circles have none (kept analytic).
inline Polygon vertices(const ApertureSpec& a) {
    std::size_t n = vertex_count(a.shape);
    if (n == 0) return {};
    // base angle puts TriangleUp apex at +y, squares and hexagons with
    // axis-aligned edges
    double base = 0.0;
    switch (a.shape) {
        case ApertureShape::TriangleUp: base = M_PI / 2.0; break;
        case ApertureShape::TriangleDown: base = -M_PI / 2.0; break;
        case ApertureShape::Square: base = M_PI / 4.0; break;
        case ApertureShape::Hexagon: base = 0.0; break;
        case ApertureShape::Circle: break;
    }
    Polygon poly;
    poly.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ang = base + a.orientation +
                     2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        poly.push_back({a.center.x + a.circumradius * std::cos(ang),
                        a.center.y + a.circumradius * std::sin(ang)});
    }
    return poly;
}

inline double aperture_area(const ApertureSpec& a) {
    if (a.is_circle()) return M_PI * a.circumradius * a.circumradius;
    return polygon_area(vertices(a));
}

struct MaskLayout {
    std::vector<ApertureSpec> apertures;
    Rect region{};
    LatticeKind lattice = LatticeKind::TriangularGapless;
    double pitch = 0.0;  // center spacing for round lattices; 0 for gapless
};

inline std::size_t count_lenses(const MaskLayout& l) { return l.apertures.size(); }

namespace detail {

constexpr double kBoundaryTol = 1e-9;  // um; region boundary counts as inside

inline bool rect_contains_tol(const Rect& r, Vec2 p) {
    return p.x >= r.lo.x - kBoundaryTol && p.x <= r.hi.x + kBoundaryTol &&
           p.y >= r.lo.y - kBoundaryTol && p.y <= r.hi.y + kBoundaryTol;
}

inline bool admit(const ApertureSpec& a, const Rect& region, InclusionRule rule) {
    if (rule == InclusionRule::CentroidInside) return rect_contains_tol(region, a.center);
    if (a.is_circle()) {
        double r = a.circumradius;
        return a.center.x - r >= region.lo.x - kBoundaryTol &&
               a.center.x + r <= region.hi.x + kBoundaryTol &&
               a.center.y - r >= region.lo.y - kBoundaryTol &&
               a.center.y + r <= region.hi.y + kBoundaryTol;
    }
    for (const Vec2& v : vertices(a))
        if (!rect_contains_tol(region, v)) return false;
    return true;
}

}  // namespace detail

/// Tile `region` with the chosen lattice. The tiling is anchored at `anchor`
/// (defaults to the region's lower-left corner): the first row's lowest edge
/// lies on the anchor's y, the first column starts at the anchor's x. Only
/// apertures admitted by `rule` are emitted, in row-major order.
/// `pitch` is the center spacing for the round lattices (0 = touching).
inline MaskLayout generate_gapless_array(LatticeKind lattice, double circumradius,
                                         const Rect& region,
                                         InclusionRule rule = InclusionRule::FullInside,
                                         double pitch = 0.0,
                                         std::optional<Vec2> anchor_opt = std::nullopt) {
    if (circumradius <= 0.0)
        throw std::invalid_argument("generate_gapless_array: circumradius must be > 0");
    if (region.degenerate())
        throw std::invalid_argument("generate_gapless_array: degenerate region");

    const Vec2 anchor = anchor_opt.value_or(region.lo);
    const double R = circumradius;
    MaskLayout out;
    out.region = region;
    out.lattice = lattice;

    auto emit = [&](ApertureSpec a) {
        if (detail::admit(a, region, rule)) out.apertures.push_back(a);
    };

    auto row_range = [&](double step, double extent_lo, double extent_hi, double lo,
                         double hi) {
        long first = static_cast<long>(std::floor((lo - anchor.y - extent_hi) / step)) - 1;
        long last = static_cast<long>(std::ceil((hi - anchor.y - extent_lo) / step)) + 1;
        return std::pair<long, long>(first, last);
    };

    switch (lattice) {
        case LatticeKind::TriangularGapless: {
            const double s = R * std::sqrt(3.0);  // side
            const double h = 1.5 * R;             // row height
            auto [r0, r1] = row_range(h, 0.0, h, region.lo.y, region.hi.y);
            for (long r = r0; r <= r1; ++r) {
                double y0 = anchor.y + static_cast<double>(r) * h;
                double off = (((r % 2) + 2) % 2 == 1) ? 0.5 * s : 0.0;
                long k0 = static_cast<long>(
                              std::floor((region.lo.x - anchor.x - off) / s)) - 1;
                long k1 = static_cast<long>(
                              std::ceil((region.hi.x - anchor.x - off) / s)) + 1;
                for (long k = k0; k <= k1; ++k) {
                    double xb = anchor.x + off + static_cast<double>(k) * s;
                    // up triangle: base on y0, apex above
                    emit({ApertureShape::TriangleUp, R, {xb + 0.5 * s, y0 + 0.5 * R}, 0.0});
                    // down triangle to its right: apex on y0, base above
                    emit({ApertureShape::TriangleDown, R, {xb + s, y0 + R}, 0.0});
                }
            }
            break;
        }
        case LatticeKind::SquareGapless: {
            const double a = R * std::sqrt(2.0);  // side
            auto [r0, r1] = row_range(a, 0.0, a, region.lo.y, region.hi.y);
            for (long j = r0; j <= r1; ++j) {
                long i0 = static_cast<long>(std::floor((region.lo.x - anchor.x) / a)) - 1;
                long i1 = static_cast<long>(std::ceil((region.hi.x - anchor.x) / a)) + 1;
                for (long i = i0; i <= i1; ++i)
                    emit({ApertureShape::Square, R,
                          {anchor.x + (static_cast<double>(i) + 0.5) * a,
                           anchor.y + (static_cast<double>(j) + 0.5) * a},
                          0.0});
            }
            break;
        }
        case LatticeKind::HexGapless: {
            const double ystep = R * std::sqrt(3.0);  // hexagon height
            const double xstep = 1.5 * R;
            long c0 = static_cast<long>(std::floor((region.lo.x - anchor.x) / xstep)) - 2;
            long c1 = static_cast<long>(std::ceil((region.hi.x - anchor.x) / xstep)) + 2;
            for (long c = c0; c <= c1; ++c) {
                double cx = anchor.x + R + static_cast<double>(c) * xstep;
                double yoff = (((c % 2) + 2) % 2 == 1) ? 0.5 * ystep : 0.0;
                auto [m0, m1] = row_range(ystep, -0.5 * ystep, 0.5 * ystep,
                                          region.lo.y, region.hi.y);
                for (long m = m0; m <= m1; ++m)
                    emit({ApertureShape::Hexagon, R,
                          {cx, anchor.y + 0.5 * ystep + yoff +
                                   static_cast<double>(m) * ystep},
                          0.0});
            }
            break;
        }
        case LatticeKind::SquareLattice: {
            const double p = pitch > 0.0 ? pitch : 2.0 * R;
            out.pitch = p;
            auto [j0, j1] = row_range(p, -R, R, region.lo.y, region.hi.y);
            for (long j = j0; j <= j1; ++j) {
                long i0 = static_cast<long>(std::floor((region.lo.x - anchor.x) / p)) - 1;
                long i1 = static_cast<long>(std::ceil((region.hi.x - anchor.x) / p)) + 1;
                for (long i = i0; i <= i1; ++i)
                    emit({ApertureShape::Circle, R,
                          {anchor.x + 0.5 * p + static_cast<double>(i) * p,
                           anchor.y + 0.5 * p + static_cast<double>(j) * p},
                          0.0});
            }
            break;
        }
        case LatticeKind::HexLattice: {
            const double p = pitch > 0.0 ? pitch : 2.0 * R;
            out.pitch = p;
            const double ystep = p * std::sqrt(3.0) / 2.0;
            auto [j0, j1] = row_range(ystep, -R, R, region.lo.y, region.hi.y);
            for (long j = j0; j <= j1; ++j) {
                double xoff = (((j % 2) + 2) % 2 == 1) ? 0.5 * p : 0.0;
                long i0 = static_cast<long>(std::floor((region.lo.x - anchor.x) / p)) - 1;
                long i1 = static_cast<long>(std::ceil((region.hi.x - anchor.x) / p)) + 1;
                for (long i = i0; i <= i1; ++i)
                    emit({ApertureShape::Circle, R,
                          {anchor.x + 0.5 * p + xoff + static_cast<double>(i) * p,
                           anchor.y + 0.5 * p + static_cast<double>(j) * ystep},
                          0.0});
            }
            break;
        }
    }
    return out;
}

/// Fraction of the region covered by lens footprints (clipped to the region).
/// Empty layout yields 0.
inline double fill_factor(const MaskLayout& layout, LensFootprint footprint) {
    if (layout.apertures.empty()) return 0.0;
    if (layout.region.degenerate())
        throw std::invalid_argument("fill_factor: degenerate region");
    double covered = 0.0;
    for (const ApertureSpec& a : layout.apertures) {
        if (footprint == LensFootprint::InscribedCircle || a.is_circle()) {
            double r = footprint == LensFootprint::InscribedCircle
                           ? inradius(a.shape, a.circumradius)
                           : a.circumradius;
            covered += circle_rect_area(a.center, r, layout.region);
        } else {
            Polygon clipped = clip_to_rect(vertices(a), layout.region);
            if (clipped.size() >= 3) covered += polygon_area(clipped);
        }
    }
    return covered / layout.region.area();
}

/// Per-unit-cell packing fraction of an infinite lattice (no boundary slack).
inline double ideal_fill_factor(LatticeKind lattice, LensFootprint footprint) {
    if (footprint == LensFootprint::AsAperture) {
        switch (lattice) {
            case LatticeKind::TriangularGapless:
            case LatticeKind::SquareGapless:
            case LatticeKind::HexGapless: return 1.0;
            case LatticeKind::SquareLattice: return M_PI / 4.0;
            case LatticeKind::HexLattice: return M_PI / (2.0 * std::sqrt(3.0));
        }
    } else {
        switch (lattice) {
            case LatticeKind::TriangularGapless: return M_PI / (3.0 * std::sqrt(3.0));
            case LatticeKind::SquareGapless: return M_PI / 4.0;
            case LatticeKind::HexGapless: return M_PI / (2.0 * std::sqrt(3.0));
            case LatticeKind::SquareLattice: return M_PI / 4.0;
            case LatticeKind::HexLattice: return M_PI / (2.0 * std::sqrt(3.0));
        }
    }
    return 0.0;
}

/// Everything needed to regenerate a lattice layout (e.g. over an enlarged
/// region with the same anchor, so the tiling does not shift).
struct LayoutParams {
    LatticeKind lattice = LatticeKind::TriangularGapless;
    double circumradius = 80.0;  // um
    Rect region{{0.0, 0.0}, {500.0, 500.0}};
    InclusionRule rule = InclusionRule::FullInside;
    double lattice_pitch = 0.0;  // center spacing for round lattices, 0 = touching
};

inline MaskLayout make_layout(const LayoutParams& p) {
    return generate_gapless_array(p.lattice, p.circumradius, p.region, p.rule,
                                  p.lattice_pitch, p.region.lo);
}

// ---------------------------------------------------------------------------
// Layout text format. One aperture per record:
//   <shape> <circumradius> <cx> <cy> <orientation> <nv> <vx> <vy> ...
// Full %.17g precision; the import reproduces the layout exactly.
// ---------------------------------------------------------------------------

inline void write_layout(std::ostream& os, const MaskLayout& l) {
    os.precision(17);
    os << "# proxlith layout v1\n";
    os << "unit um\n";
    os << "region " << l.region.lo.x << ' ' << l.region.lo.y << ' ' << l.region.hi.x
       << ' ' << l.region.hi.y << '\n';
    os << "lattice " << lattice_tag(l.lattice) << '\n';
    os << "pitch " << l.pitch << '\n';
    os << "apertures " << l.apertures.size() << '\n';
    for (const ApertureSpec& a : l.apertures) {
        Polygon v = vertices(a);
        os << shape_tag(a.shape) << ' ' << a.circumradius << ' ' << a.center.x << ' '
           << a.center.y << ' ' << a.orientation << ' ' << v.size();
        for (const Vec2& p : v) os << ' ' << p.x << ' ' << p.y;
        os << '\n';
    }
}

inline MaskLayout read_layout(std::istream& is) {
    auto fail = [](int line, const std::string& what) {
        throw std::runtime_error("layout parse error at line " + std::to_string(line) +
                                 ": " + what);
    };
    MaskLayout l;
    std::string tok, line;
    int lineno = 0;

    auto next_line = [&]() -> std::string {
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line[0] != '#') return line;
        }
        return {};
    };

    std::istringstream ls(next_line());
    std::string unit;
    ls >> tok >> unit;
    if (tok != "unit" || unit != "um") fail(lineno, "expected 'unit um'");

    ls = std::istringstream(next_line());
    ls >> tok >> l.region.lo.x >> l.region.lo.y >> l.region.hi.x >> l.region.hi.y;
    if (tok != "region" || !ls) fail(lineno, "expected 'region x0 y0 x1 y1'");

    ls = std::istringstream(next_line());
    std::string lat;
    ls >> tok >> lat;
    auto lk = lattice_from_tag(lat);
    if (tok != "lattice" || !lk) fail(lineno, "unknown lattice tag");
    l.lattice = *lk;

    ls = std::istringstream(next_line());
    ls >> tok >> l.pitch;
    if (tok != "pitch" || !ls) fail(lineno, "expected 'pitch p'");

    ls = std::istringstream(next_line());
    std::size_t n = 0;
    ls >> tok >> n;
    if (tok != "apertures" || !ls) fail(lineno, "expected 'apertures n'");

    l.apertures.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ls = std::istringstream(next_line());
        ApertureSpec a;
        std::string stag;
        std::size_t nv = 0;
        ls >> stag >> a.circumradius >> a.center.x >> a.center.y >> a.orientation >> nv;
        auto sh = shape_from_tag(stag);
        if (!sh || !ls) fail(lineno, "bad aperture record");
        a.shape = *sh;
        if (nv != vertex_count(a.shape))
            fail(lineno, "vertex count does not match shape '" + stag + "'");
        if (a.circumradius <= 0.0) fail(lineno, "circumradius must be > 0");
        for (std::size_t k = 0; k < 2 * nv; ++k) {
            double dummy;
            if (!(ls >> dummy)) fail(lineno, "truncated vertex list");
        }
        l.apertures.push_back(a);
    }
    return l;
}

inline void write_layout_file(const std::string& path, const MaskLayout& l) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_layout(os, l);
}

inline MaskLayout read_layout_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    return read_layout(is);
}

}  // namespace proxlith
