#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxlith/geometry.hpp"
#include "proxlith/grid.hpp"
#include "proxlith/layout.hpp"

namespace proxlith {

enum class Axis { X, Y };

/// Height samples along a straight segment; pos is arclength from the start.
struct Section {
    std::vector<double> pos;  // um along the section
    std::vector<double> val;
    double pitch = 0.0;  // sample spacing
};

/// Bilinear profile along the segment from start to end with `samples`
/// evenly spaced points. Both endpoints must be inside the grid's sample
/// domain and the segment must have nonzero length.
inline Section cross_section(const Grid2<double>& g, Vec2 start, Vec2 end, int samples) {
    if (samples < 2) throw std::invalid_argument("cross_section: need at least 2 samples");
    const double len = std::hypot(end.x - start.x, end.y - start.y);
    if (!(len > 0.0)) throw std::invalid_argument("cross_section: zero-length segment");
    if (!in_sample_domain(g, start) || !in_sample_domain(g, end))
        throw std::invalid_argument("cross_section: segment leaves the sample domain");
    Section s;
    s.pitch = len / static_cast<double>(samples - 1);
    s.pos.reserve(static_cast<std::size_t>(samples));
    s.val.reserve(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
        const Vec2 p{start.x + t * (end.x - start.x), start.y + t * (end.y - start.y)};
        s.pos.push_back(t * len);
        s.val.push_back(bilinear(g, p));
    }
    return s;
}

/// Full-width section along a grid axis, snapped to the nearest row/column.
inline Section cross_section(const Grid2<double>& g, Axis axis, double coord) {
    if (axis == Axis::X) {
        auto j = static_cast<long>(std::llround((coord - g.origin.y) / g.pitch));
        j = std::max(0L, std::min(static_cast<long>(g.ny) - 1, j));
        const double y = g.y_of(static_cast<std::size_t>(j));
        return cross_section(g, {g.origin.x, y}, {g.x_of(g.nx - 1), y},
                             static_cast<int>(g.nx));
    }
    auto i = static_cast<long>(std::llround((coord - g.origin.x) / g.pitch));
    i = std::max(0L, std::min(static_cast<long>(g.nx) - 1, i));
    const double x = g.x_of(static_cast<std::size_t>(i));
    return cross_section(g, {x, g.origin.y}, {x, g.y_of(g.ny - 1)}, static_cast<int>(g.ny));
}

// ---------------------------------------------------------------------------
// Sphere fitting: algebraic least squares seeded into Gauss-Newton on the
// geometric residual |p - c| - R.
// ---------------------------------------------------------------------------

struct SphereFit {
    std::array<double, 3> center{};
    double radius = 0.0;
    double rms = 0.0;            // geometric residual
    double max_deviation = 0.0;  // largest |residual|
    std::size_t sample_count = 0;
    int iterations = 0;
    bool converged = false;
};

namespace fitdetail {

/// Gaussian elimination with partial pivoting; returns false if singular.
template <int N>
inline bool solve(std::array<std::array<double, N>, N>& A, std::array<double, N>& b) {
    for (int col = 0; col < N; ++col) {
        int piv = col;
        for (int r = col + 1; r < N; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-12) return false;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < N; ++r) {
            double f = A[r][col] / A[col][col];
            for (int c = col; c < N; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = N - 1; r >= 0; --r) {
        for (int c = r + 1; c < N; ++c) b[r] -= A[r][c] * b[c];
        b[r] /= A[r][r];
    }
    return true;
}

}  // namespace fitdetail

/// Best-fit sphere through 3-D points. Not converged (all-zero result) when
/// the points are too few, planar, or otherwise without usable curvature.
inline SphereFit fit_sphere(const std::vector<std::array<double, 3>>& pts) {
    SphereFit fit;
    fit.sample_count = pts.size();
    if (pts.size() < 4) return fit;

    // algebraic seed: x^2+y^2+z^2 + Ax + By + Cz + D = 0
    std::array<std::array<double, 4>, 4> M{};
    std::array<double, 4> rhs{};
    for (const auto& p : pts) {
        const double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        const std::array<double, 4> row{p[0], p[1], p[2], 1.0};
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) M[i][j] += row[i] * row[j];
            rhs[i] += -r2 * row[i];
        }
    }
    if (!fitdetail::solve<4>(M, rhs)) return fit;
    std::array<double, 3> c{-0.5 * rhs[0], -0.5 * rhs[1], -0.5 * rhs[2]};
    double R2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2] - rhs[3];
    if (!(R2 > 0.0)) return fit;
    double R = std::sqrt(R2);

    // Gauss-Newton refinement
    const int max_iter = 100;
    for (int it = 0; it < max_iter; ++it) {
        std::array<std::array<double, 4>, 4> JtJ{};
        std::array<double, 4> Jtr{};
        for (const auto& p : pts) {
            const double dx = p[0] - c[0], dy = p[1] - c[1], dz = p[2] - c[2];
            const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (d < 1e-12) continue;
            const double res = d - R;
            const std::array<double, 4> J{-dx / d, -dy / d, -dz / d, -1.0};
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) JtJ[i][j] += J[i] * J[j];
                Jtr[i] += J[i] * res;
            }
        }
        std::array<double, 4> step{-Jtr[0], -Jtr[1], -Jtr[2], -Jtr[3]};
        if (!fitdetail::solve<4>(JtJ, step)) break;
        c[0] += step[0];
        c[1] += step[1];
        c[2] += step[2];
        R += step[3];
        fit.iterations = it + 1;
        const double change = std::sqrt(step[0] * step[0] + step[1] * step[1] +
                                        step[2] * step[2] + step[3] * step[3]);
        if (change < 1e-9) {
            fit.converged = true;
            break;
        }
    }
    if (!(R > 0.0) || !std::isfinite(R)) {
        fit.converged = false;
        return fit;
    }

    double ss = 0.0, worst = 0.0;
    for (const auto& p : pts) {
        const double d = std::hypot(std::hypot(p[0] - c[0], p[1] - c[1]), p[2] - c[2]);
        ss += (d - R) * (d - R);
        worst = std::max(worst, std::abs(d - R));
    }
    fit.center = c;
    fit.radius = R;
    fit.rms = std::sqrt(ss / static_cast<double>(pts.size()));
    fit.max_deviation = worst;
    return fit;
}

namespace metdetail {

inline std::vector<Vec2> perimeter_samples(const ApertureSpec& lens, int per_edge = 16) {
    std::vector<Vec2> out;
    if (lens.is_circle()) {
        const int n = 64;
        out.reserve(n);
        for (int i = 0; i < n; ++i) {
            double a = 2.0 * M_PI * i / n;
            out.push_back({lens.center.x + lens.circumradius * std::cos(a),
                           lens.center.y + lens.circumradius * std::sin(a)});
        }
        return out;
    }
    Polygon poly = vertices(lens);
    for (std::size_t e = 0; e < poly.size(); ++e) {
        const Vec2 a = poly[e], b = poly[(e + 1) % poly.size()];
        for (int k = 0; k < per_edge; ++k) {
            double t = (k + 0.5) / per_edge;
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

/// Deepest boundary points: edge midpoints for polygons (where neighboring
/// lenses meet across the shared edge), a dense ring for circles.
inline std::vector<Vec2> midline_samples(const ApertureSpec& lens) {
    if (lens.is_circle()) return perimeter_samples(lens);
    Polygon poly = vertices(lens);
    std::vector<Vec2> out;
    out.reserve(poly.size());
    for (std::size_t e = 0; e < poly.size(); ++e) {
        const Vec2 a = poly[e], b = poly[(e + 1) % poly.size()];
        out.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
    return out;
}

inline bool in_footprint(const ApertureSpec& lens, const Polygon& poly, Vec2 p,
                         double shrink = 0.0) {
    if (lens.is_circle()) {
        double r = lens.circumradius - shrink;
        return (p - lens.center).norm2() <= r * r;
    }
    return point_in_convex(p, poly, shrink);
}

inline bool footprint_in_domain(const Grid2<double>& g, const ApertureSpec& lens) {
    for (const Vec2& p : perimeter_samples(lens))
        if (!in_sample_domain(g, p)) return false;
    return true;
}

}  // namespace metdetail

/// Sphere fit over a lens footprint, using every sample higher than the
/// boundary baseline (the mean height along the footprint perimeter).
inline SphereFit fit_sphere(const Grid2<double>& profile, const ApertureSpec& lens) {
    if (!metdetail::footprint_in_domain(profile, lens))
        throw std::invalid_argument("fit_sphere: lens footprint leaves the profile");

    double baseline = 0.0;
    const auto per = metdetail::perimeter_samples(lens);
    for (const Vec2& p : per) baseline += bilinear(profile, p);
    baseline /= static_cast<double>(per.size());

    Polygon poly = lens.is_circle() ? Polygon{} : vertices(lens);
    const double rb = lens.circumradius;
    auto i0 = static_cast<long>(std::floor((lens.center.x - rb - profile.origin.x) / profile.pitch));
    auto i1 = static_cast<long>(std::ceil((lens.center.x + rb - profile.origin.x) / profile.pitch));
    auto j0 = static_cast<long>(std::floor((lens.center.y - rb - profile.origin.y) / profile.pitch));
    auto j1 = static_cast<long>(std::ceil((lens.center.y + rb - profile.origin.y) / profile.pitch));
    i0 = std::max(i0, 0L);
    j0 = std::max(j0, 0L);
    i1 = std::min(i1, static_cast<long>(profile.nx) - 1);
    j1 = std::min(j1, static_cast<long>(profile.ny) - 1);

    std::vector<std::array<double, 3>> pts;
    for (long j = j0; j <= j1; ++j)
        for (long i = i0; i <= i1; ++i) {
            const Vec2 p{profile.x_of(static_cast<std::size_t>(i)),
                         profile.y_of(static_cast<std::size_t>(j))};
            if (!metdetail::in_footprint(lens, poly, p)) continue;
            const double v =
                profile.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (v > baseline) pts.push_back({p.x, p.y, v});
        }
    if (pts.size() < 16)
        throw std::invalid_argument(
            "fit_sphere: fewer than 16 samples above the boundary baseline");
    SphereFit fit = fit_sphere(pts);
    if (!fit.converged || !(fit.radius > 0.0))
        throw std::runtime_error("fit_sphere: no usable curvature in the selected samples");
    return fit;
}

/// Surface roughness as the mean absolute deviation from the least-squares
/// mean plane over a rectangular window.
struct RoughnessReport {
    double ra_nm = 0.0;
    std::size_t sample_count = 0;
};

inline RoughnessReport roughness_ra(const Grid2<double>& h, const Rect& window) {
    // plane z = a + b x + c y by least squares
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0, sz = 0, sxz = 0, syz = 0;
    for (std::size_t j = 0; j < h.ny; ++j) {
        const double y = h.y_of(j);
        if (y < window.lo.y || y > window.hi.y) continue;
        for (std::size_t i = 0; i < h.nx; ++i) {
            const double x = h.x_of(i);
            if (x < window.lo.x || x > window.hi.x) continue;
            const double z = h.at(i, j);
            sw += 1;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
            sz += z;
            sxz += x * z;
            syz += y * z;
        }
    }
    if (sw < 3) throw std::invalid_argument("roughness_ra: window contains too few samples");
    std::array<std::array<double, 3>, 3> A{{{sw, sx, sy}, {sx, sxx, sxy}, {sy, sxy, syy}}};
    std::array<double, 3> b{sz, sxz, syz};
    if (!fitdetail::solve<3>(A, b))
        throw std::runtime_error("roughness_ra: degenerate sample window");
    double acc = 0.0, n = 0.0;
    for (std::size_t j = 0; j < h.ny; ++j) {
        const double y = h.y_of(j);
        if (y < window.lo.y || y > window.hi.y) continue;
        for (std::size_t i = 0; i < h.nx; ++i) {
            const double x = h.x_of(i);
            if (x < window.lo.x || x > window.hi.x) continue;
            acc += std::abs(h.at(i, j) - (b[0] + b[1] * x + b[2] * y));
            n += 1;
        }
    }
    RoughnessReport rep;
    rep.ra_nm = 1000.0 * acc / n;
    rep.sample_count = static_cast<std::size_t>(sw);
    return rep;
}

// ---------------------------------------------------------------------------
// Per-lens shape metrics and regime classification
// ---------------------------------------------------------------------------

enum class LensRegime { FlatTop, Convex, Blurred };

inline const char* regime_tag(LensRegime r) {
    switch (r) {
        case LensRegime::FlatTop: return "flat_top";
        case LensRegime::Convex: return "convex";
        case LensRegime::Blurred: return "blurred";
    }
    return "?";
}

inline std::optional<LensRegime> regime_from_tag(const std::string& t) {
    if (t == "flat_top") return LensRegime::FlatTop;
    if (t == "convex") return LensRegime::Convex;
    if (t == "blurred") return LensRegime::Blurred;
    return std::nullopt;
}

struct RegimeThresholds {
    double plateau_fraction = 0.10;  // above: replica of the aperture
    double modulation_min = 0.05;    // below: washed out
    double sag_min_um = 1.0;         // below: washed out
};

struct LensMetrics {
    int lens_id = -1;
    ApertureShape shape = ApertureShape::Circle;
    Vec2 center{};
    double peak = 0.0;              // um
    double boundary_mean = 0.0;     // um, along the footprint perimeter
    double boundary_min = 0.0;      // um
    double midline_min = 0.0;       // um, at the deepest boundary points
    double sag = 0.0;               // peak - boundary_mean
    double modulation = 0.0;        // (peak - midline_min) / peak
    double plateau_fraction = 0.0;  // footprint fraction at >= 99% thickness
    SphereFit sphere;
    bool sphere_ok = false;
    LensRegime regime = LensRegime::Blurred;
};

/// Shape metrics for one lens footprint on a developed surface. The footprint
/// must lie inside the surface's sample domain. The sphere fit can be skipped
/// when only heights and fractions are needed.
inline LensMetrics lens_metrics(const Grid2<double>& surface, const ApertureSpec& lens,
                                double thickness_um, bool with_sphere = true) {
    if (!(thickness_um > 0.0))
        throw std::invalid_argument("lens_metrics: thickness must be > 0");
    if (!metdetail::footprint_in_domain(surface, lens))
        throw std::invalid_argument("lens_metrics: lens footprint leaves the surface");
    LensMetrics m;
    m.shape = lens.shape;
    m.center = lens.center;

    // boundary statistics from bilinear samples along the perimeter
    double bsum = 0.0;
    double bmin = std::numeric_limits<double>::infinity();
    const auto per = metdetail::perimeter_samples(lens);
    for (const Vec2& p : per) {
        const double v = bilinear(surface, p);
        bsum += v;
        bmin = std::min(bmin, v);
    }
    m.boundary_mean = bsum / static_cast<double>(per.size());
    m.boundary_min = bmin;

    double mmin = std::numeric_limits<double>::infinity();
    for (const Vec2& p : metdetail::midline_samples(lens))
        mmin = std::min(mmin, bilinear(surface, p));
    m.midline_min = mmin;

    // interior statistics on cell centers
    Polygon poly = lens.is_circle() ? Polygon{} : vertices(lens);
    const double rb = lens.circumradius;
    auto i0 = static_cast<long>(std::floor((lens.center.x - rb - surface.origin.x) / surface.pitch));
    auto i1 = static_cast<long>(std::ceil((lens.center.x + rb - surface.origin.x) / surface.pitch));
    auto j0 = static_cast<long>(std::floor((lens.center.y - rb - surface.origin.y) / surface.pitch));
    auto j1 = static_cast<long>(std::ceil((lens.center.y + rb - surface.origin.y) / surface.pitch));
    i0 = std::max(i0, 0L);
    j0 = std::max(j0, 0L);
    i1 = std::min(i1, static_cast<long>(surface.nx) - 1);
    j1 = std::min(j1, static_cast<long>(surface.ny) - 1);

    std::size_t inside = 0, plateau = 0;
    std::vector<std::array<double, 3>> above;
    for (long j = j0; j <= j1; ++j)
        for (long i = i0; i <= i1; ++i) {
            const Vec2 p{surface.x_of(static_cast<std::size_t>(i)),
                         surface.y_of(static_cast<std::size_t>(j))};
            if (!metdetail::in_footprint(lens, poly, p)) continue;
            const double v = surface.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            ++inside;
            m.peak = std::max(m.peak, v);
            if (v >= 0.99 * thickness_um) ++plateau;
            if (with_sphere && v > m.boundary_mean) above.push_back({p.x, p.y, v});
        }
    if (inside == 0) throw std::invalid_argument("lens_metrics: footprint contains no samples");
    m.plateau_fraction = static_cast<double>(plateau) / static_cast<double>(inside);
    m.sag = m.peak - m.boundary_mean;
    m.modulation = m.peak > 0.0 ? (m.peak - m.midline_min) / m.peak : 0.0;

    if (above.size() >= 16) {
        SphereFit fit = fit_sphere(above);
        if (fit.converged && fit.radius > 0.0) {
            m.sphere = fit;
            m.sphere_ok = true;
        }
    }
    return m;
}

inline LensRegime classify_regime(const LensMetrics& m, const RegimeThresholds& th = {}) {
    if (m.plateau_fraction > th.plateau_fraction) return LensRegime::FlatTop;
    if (m.modulation < th.modulation_min || m.sag < th.sag_min_um) return LensRegime::Blurred;
    return LensRegime::Convex;
}

/// Metrics and regime label for every lens of the layout whose footprint lies
/// on the profile. Lenses with no usable samples are skipped; the optional
/// counter reports how many.
inline std::vector<LensMetrics> classify_regime(const Grid2<double>& profile,
                                                const MaskLayout& layout, double thickness_um,
                                                const RegimeThresholds& th = {},
                                                std::size_t* skipped = nullptr,
                                                bool with_sphere = true) {
    std::vector<LensMetrics> out;
    std::size_t miss = 0;
    for (std::size_t k = 0; k < layout.apertures.size(); ++k) {
        try {
            LensMetrics m = lens_metrics(profile, layout.apertures[k], thickness_um, with_sphere);
            m.lens_id = static_cast<int>(k);
            m.regime = classify_regime(m, th);
            out.push_back(std::move(m));
        } catch (const std::invalid_argument&) {
            ++miss;
        }
    }
    if (skipped) *skipped = miss;
    return out;
}

/// Fraction of the layout region covered by lenses whose sag (peak height
/// minus boundary mean) exceeds min_sag. Every footprint that intersects the
/// region must lie inside the profile's sample domain, so profiles need a
/// guard margin when boundary lenses overhang the region.
inline double realized_fill_factor(const Grid2<double>& profile, const MaskLayout& layout,
                                   double min_sag_um) {
    const double region_area = layout.region.area();
    if (!(region_area > 0.0))
        throw std::invalid_argument("realized_fill_factor: degenerate region");
    double covered = 0.0;
    for (const ApertureSpec& a : layout.apertures) {
        double part = a.is_circle() ? circle_rect_area(a.center, a.circumradius, layout.region)
                                    : polygon_area(clip_to_rect(vertices(a), layout.region));
        if (part <= 1e-12 * region_area) continue;
        LensMetrics m = lens_metrics(profile, a, 1.0, false);
        if (m.sag > min_sag_um) covered += part;
    }
    return covered / region_area;
}

/// 10%-to-90% rise distance of the left flank of a profile, relative to the
/// profile's maximum. The profile must start below the 10% level.
inline double edge_spread_width(const std::vector<double>& profile, double pitch) {
    if (profile.size() < 4) throw std::invalid_argument("edge_spread_width: profile too short");
    double peak = 0.0;
    for (double v : profile) peak = std::max(peak, v);
    if (!(peak > 0.0)) throw std::invalid_argument("edge_spread_width: flat profile");

    // reference level: median of the bright side, so diffraction overshoot
    // does not shift the 10/90 levels
    std::vector<double> bright;
    for (double v : profile)
        if (v >= 0.5 * peak) bright.push_back(v);
    std::sort(bright.begin(), bright.end());
    const std::size_t nb = bright.size();
    const double level =
        nb % 2 ? bright[nb / 2] : 0.5 * (bright[nb / 2 - 1] + bright[nb / 2]);
    const double lo = 0.1 * level, hi = 0.9 * level;
    if (profile[0] >= lo)
        throw std::invalid_argument(
            "edge_spread_width: profile does not start below 10% of its plateau");

    // crossings of the left-side running maximum: unique even with ringing
    auto cross = [&](double want) -> double {
        double env = profile[0];
        for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
            double next = std::max(env, profile[i + 1]);
            if (env < want && next >= want) {
                double t = (want - env) / (next - env);
                return (static_cast<double>(i) + t) * pitch;
            }
            env = next;
        }
        throw std::runtime_error("edge_spread_width: level crossing not found");
    };
    const double x10 = cross(lo);
    const double x90 = cross(hi);
    return x90 - x10;
}

inline double edge_spread_width(const Section& s) {
    return edge_spread_width(s.val, s.pitch);
}

}  // namespace proxlith
