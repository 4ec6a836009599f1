#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "proxlith/geometry.hpp"

namespace proxlith {

/// Uniform 2-D sample grid with physical pitch (um per sample), row-major
/// storage. `origin` is the physical coordinate of the center of cell (0,0);
/// cell (ix,iy) sits at origin + (ix,iy)*pitch.
template <class T>
struct Grid2 {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double pitch = 0.0;
    Vec2 origin{0.0, 0.0};
    std::vector<T> data;

    Grid2() = default;
    Grid2(std::size_t nx_, std::size_t ny_, double pitch_, Vec2 origin_ = {},
          T fill = T{})
        : nx(nx_), ny(ny_), pitch(pitch_), origin(origin_), data(nx_ * ny_, fill) {}

    std::size_t size() const { return data.size(); }
    T& at(std::size_t ix, std::size_t iy) { return data[iy * nx + ix]; }
    const T& at(std::size_t ix, std::size_t iy) const { return data[iy * nx + ix]; }

    double x_of(std::size_t ix) const { return origin.x + static_cast<double>(ix) * pitch; }
    double y_of(std::size_t iy) const { return origin.y + static_cast<double>(iy) * pitch; }

    /// Physical domain spanned by cell centers.
    Rect sample_domain() const {
        return {origin,
                {origin.x + static_cast<double>(nx - 1) * pitch,
                 origin.y + static_cast<double>(ny - 1) * pitch}};
    }

    /// Physical extent including the half-cell border.
    Rect cell_domain() const {
        Rect d = sample_domain();
        return d.grown(0.5 * pitch, 0.5 * pitch);
    }
};

/// Bilinear interpolation at a physical coordinate. The point must lie within
/// the sample domain (cell-center hull).
template <class T>
inline double bilinear(const Grid2<T>& g, Vec2 p) {
    if (g.nx < 2 || g.ny < 2) throw std::invalid_argument("bilinear: grid too small");
    double fx = (p.x - g.origin.x) / g.pitch;
    double fy = (p.y - g.origin.y) / g.pitch;
    const double ex = 1e-9;  // tolerate boundary roundoff
    if (fx < -ex || fy < -ex || fx > static_cast<double>(g.nx - 1) + ex ||
        fy > static_cast<double>(g.ny - 1) + ex)
        throw std::out_of_range("bilinear: point outside grid sample domain");
    fx = std::min(std::max(fx, 0.0), static_cast<double>(g.nx - 1));
    fy = std::min(std::max(fy, 0.0), static_cast<double>(g.ny - 1));
    std::size_t ix = std::min(static_cast<std::size_t>(fx), g.nx - 2);
    std::size_t iy = std::min(static_cast<std::size_t>(fy), g.ny - 2);
    double tx = fx - static_cast<double>(ix);
    double ty = fy - static_cast<double>(iy);
    double v00 = static_cast<double>(g.at(ix, iy));
    double v10 = static_cast<double>(g.at(ix + 1, iy));
    double v01 = static_cast<double>(g.at(ix, iy + 1));
    double v11 = static_cast<double>(g.at(ix + 1, iy + 1));
    return v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty) + v01 * (1 - tx) * ty +
           v11 * tx * ty;
}

template <class T>
inline bool in_sample_domain(const Grid2<T>& g, Vec2 p) {
    Rect d = g.sample_domain();
    return p.x >= d.lo.x && p.x <= d.hi.x && p.y >= d.lo.y && p.y <= d.hi.y;
}

}  // namespace proxlith
