#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxlith/geometry.hpp"
#include "proxlith/grid.hpp"
#include "proxlith/layout.hpp"

namespace proxlith {

/// Rasterization of a mask layout to a transmission grid in [0, 1].
///
/// `edge_linewidth` models the opaque stroke a mask plotter draws along every
/// aperture boundary: each aperture is eroded by half the linewidth, so two
/// edge-sharing apertures leave an opaque strip of the full linewidth between
/// them. 0 disables the stroke and reproduces the ideal layout.
struct RasterParams {
    double pitch = 0.5;          // um per cell
    double edge_linewidth = 0.0; // um, opaque boundary stroke
    int supersample = 4;         // subsamples per cell edge (box filter)
};

inline Grid2<double> rasterize(const MaskLayout& layout, const RasterParams& par) {
    if (par.pitch <= 0.0) throw std::invalid_argument("rasterize: pitch must be > 0");
    if (par.supersample < 1)
        throw std::invalid_argument("rasterize: supersample must be >= 1");
    if (par.edge_linewidth < 0.0)
        throw std::invalid_argument("rasterize: edge_linewidth must be >= 0");
    const Rect& reg = layout.region;
    if (reg.degenerate()) throw std::invalid_argument("rasterize: degenerate region");

    const double w = reg.width(), h = reg.height();
    const auto nx = static_cast<std::size_t>(std::llround(w / par.pitch));
    const auto ny = static_cast<std::size_t>(std::llround(h / par.pitch));
    if (nx == 0 || ny == 0 ||
        std::abs(static_cast<double>(nx) * par.pitch - w) > 1e-6 * w ||
        std::abs(static_cast<double>(ny) * par.pitch - h) > 1e-6 * h)
        throw std::invalid_argument(
            "rasterize: region size is not an integer multiple of the pitch");

    const int S = par.supersample;
    const double sub = par.pitch / S;
    const double half_lw = 0.5 * par.edge_linewidth;
    if (par.edge_linewidth > 0.0 && sub > half_lw + 1e-12)
        throw std::invalid_argument(
            "rasterize: pitch " + std::to_string(par.pitch) +
            " um cannot resolve edge linewidth " + std::to_string(par.edge_linewidth) +
            " um; need pitch <= " + std::to_string(S * half_lw) +
            " um (or raise supersample)");
    double min_edge = std::numeric_limits<double>::infinity();
    for (const ApertureSpec& a : layout.apertures) {
        if (inradius(a.shape, a.circumradius) <= half_lw + 1e-12)
            throw std::invalid_argument(
                std::string("rasterize: edge linewidth ") +
                std::to_string(par.edge_linewidth) + " um fully closes a " +
                shape_tag(a.shape) + " aperture (inradius " +
                std::to_string(inradius(a.shape, a.circumradius)) + " um)");
        if (a.is_circle()) {
            min_edge = std::min(min_edge, 2.0 * a.circumradius);
        } else {
            const Polygon poly = vertices(a);
            for (std::size_t e = 0; e < poly.size(); ++e) {
                const Vec2 d = poly[(e + 1) % poly.size()] - poly[e];
                min_edge = std::min(min_edge, std::hypot(d.x, d.y));
            }
        }
    }
    if (!layout.apertures.empty() && min_edge < 8.0 * par.pitch)
        throw std::invalid_argument(
            "rasterize: pitch " + std::to_string(par.pitch) +
            " um puts fewer than 8 samples across the smallest aperture edge (" +
            std::to_string(min_edge) + " um); need pitch <= " +
            std::to_string(min_edge / 8.0) + " um");

    // supersampled occupancy, OR over apertures so shared edges never double
    const std::size_t snx = nx * static_cast<std::size_t>(S);
    const std::size_t sny = ny * static_cast<std::size_t>(S);
    std::vector<std::uint8_t> occ(snx * sny, 0);

    auto sx_of = [&](std::size_t i) { return reg.lo.x + (static_cast<double>(i) + 0.5) * sub; };
    auto sy_of = [&](std::size_t j) { return reg.lo.y + (static_cast<double>(j) + 0.5) * sub; };
    auto clamp_index = [](double t, std::size_t n) {
        if (t < 0.0) return std::size_t{0};
        auto i = static_cast<std::size_t>(t);
        return i >= n ? n - 1 : i;
    };

    for (const ApertureSpec& a : layout.apertures) {
        Polygon poly = a.is_circle() ? Polygon{} : vertices(a);
        Rect bb;
        if (a.is_circle()) {
            double r = a.circumradius - half_lw;
            bb = {{a.center.x - r, a.center.y - r}, {a.center.x + r, a.center.y + r}};
        } else {
            bb = {poly[0], poly[0]};
            for (const Vec2& v : poly) {
                bb.lo.x = std::min(bb.lo.x, v.x);
                bb.lo.y = std::min(bb.lo.y, v.y);
                bb.hi.x = std::max(bb.hi.x, v.x);
                bb.hi.y = std::max(bb.hi.y, v.y);
            }
        }
        if (bb.hi.x < reg.lo.x || bb.lo.x > reg.hi.x || bb.hi.y < reg.lo.y ||
            bb.lo.y > reg.hi.y)
            continue;
        std::size_t j0 = clamp_index((bb.lo.y - reg.lo.y) / sub - 1.0, sny);
        std::size_t j1 = clamp_index((bb.hi.y - reg.lo.y) / sub + 1.0, sny);
        std::size_t i0 = clamp_index((bb.lo.x - reg.lo.x) / sub - 1.0, snx);
        std::size_t i1 = clamp_index((bb.hi.x - reg.lo.x) / sub + 1.0, snx);
        if (a.is_circle()) {
            const double r = a.circumradius - half_lw;
            const double r2 = r * r;
            for (std::size_t j = j0; j <= j1; ++j) {
                double dy = sy_of(j) - a.center.y;
                for (std::size_t i = i0; i <= i1; ++i) {
                    double dx = sx_of(i) - a.center.x;
                    if (dx * dx + dy * dy <= r2) occ[j * snx + i] = 1;
                }
            }
        } else {
            for (std::size_t j = j0; j <= j1; ++j) {
                double y = sy_of(j);
                for (std::size_t i = i0; i <= i1; ++i)
                    if (point_in_convex({sx_of(i), y}, poly, half_lw))
                        occ[j * snx + i] = 1;
            }
        }
    }

    Grid2<double> g(nx, ny, par.pitch,
                    {reg.lo.x + 0.5 * par.pitch, reg.lo.y + 0.5 * par.pitch});
    const double inv = 1.0 / (static_cast<double>(S) * static_cast<double>(S));
    for (std::size_t cy = 0; cy < ny; ++cy)
        for (std::size_t cx = 0; cx < nx; ++cx) {
            unsigned hit = 0;
            for (int jj = 0; jj < S; ++jj) {
                const std::uint8_t* row =
                    occ.data() + (cy * S + static_cast<std::size_t>(jj)) * snx + cx * S;
                for (int ii = 0; ii < S; ++ii) hit += row[ii];
            }
            g.at(cx, cy) = static_cast<double>(hit) * inv;
        }
    return g;
}

}  // namespace proxlith
