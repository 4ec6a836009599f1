#pragma once

#include <cmath>
#include <stdexcept>

#include "proxlith/grid.hpp"
#include "proxlith/layout.hpp"
#include "proxlith/raster.hpp"
#include "proxlith/recipe.hpp"
#include "proxlith/resist.hpp"
#include "proxlith/wave_optics.hpp"

namespace proxlith {

/// All intermediate fields of one print at one gap, cropped to the recipe's
/// region. The uncropped surface is kept so lenses overhanging the region
/// edge can still be measured.
struct ProcessResult {
    MaskLayout layout;         // over the guarded region
    Grid2<double> transmission;
    Grid2<double> aerial;      // relative intensity
    Grid2<double> dose;        // mJ/cm2, after blur
    Grid2<double> surface;     // developed height, um
    Grid2<double> guarded_surface;
};

namespace procdetail {

inline Grid2<double> crop(const Grid2<double>& g, std::size_t off, std::size_t nx,
                          std::size_t ny) {
    Grid2<double> out(nx, ny, g.pitch,
                      {g.origin.x + static_cast<double>(off) * g.pitch,
                       g.origin.y + static_cast<double>(off) * g.pitch});
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) out.at(i, j) = g.at(i + off, j + off);
    return out;
}

inline std::size_t guard_cells(const Recipe& r) {
    return static_cast<std::size_t>(std::ceil(r.guard_um / r.raster.pitch));
}

/// Layout regenerated over the region plus guard ring, anchored at the
/// original region corner so the tiling pattern is unchanged.
inline MaskLayout guarded_layout(const Recipe& r) {
    const double g = static_cast<double>(guard_cells(r)) * r.raster.pitch;
    Rect expanded = r.layout.region.grown(g);
    return generate_gapless_array(r.layout.lattice, r.layout.circumradius, expanded,
                                  r.layout.rule, r.layout.lattice_pitch,
                                  r.layout.region.lo);
}

}  // namespace procdetail

/// Guarded transmission grid for the recipe (region plus guard ring).
inline Grid2<double> guarded_transmission(const Recipe& r) {
    return rasterize(procdetail::guarded_layout(r), r.raster);
}

/// Mask -> aerial image -> dose -> developed surface at one gap. The mask is
/// simulated over the region plus a guard ring (so lenses near the region
/// edge keep their neighbors), then every field is cropped back.
inline ProcessResult simulate_process(const Recipe& r, double gap_um, int threads = 1) {
    if (gap_um < 0.0) throw std::invalid_argument("simulate_process: gap must be >= 0");
    r.resist.validate();

    ProcessResult res;
    res.layout = procdetail::guarded_layout(r);
    Grid2<double> trans = rasterize(res.layout, r.raster);
    Grid2<double> aerial = aerial_image(trans, r.source.make(), gap_um, r.prop, threads);
    Grid2<double> dose = accumulate_dose(aerial, r.source.make(), r.resist);
    dose = blur_dose(dose, r.resist.blur_sigma_um);
    res.guarded_surface = develop(dose, r.resist);

    const std::size_t off = procdetail::guard_cells(r);
    const auto nx = trans.nx - 2 * off, ny = trans.ny - 2 * off;
    res.transmission = procdetail::crop(trans, off, nx, ny);
    res.aerial = procdetail::crop(aerial, off, nx, ny);
    res.dose = procdetail::crop(dose, off, nx, ny);
    res.surface = procdetail::crop(res.guarded_surface, off, nx, ny);
    return res;
}

/// An isolated single aperture of the recipe's lens shape, centered in a
/// frame wide enough that its diffraction flanks decay before the frame
/// edge. Used for edge response measurements.
inline MaskLayout reference_aperture_layout(const Recipe& r) {
    ApertureShape shape = ApertureShape::Circle;
    switch (r.layout.lattice) {
        case LatticeKind::TriangularGapless: shape = ApertureShape::TriangleUp; break;
        case LatticeKind::SquareGapless: shape = ApertureShape::Square; break;
        case LatticeKind::HexGapless: shape = ApertureShape::Hexagon; break;
        case LatticeKind::SquareLattice:
        case LatticeKind::HexLattice: shape = ApertureShape::Circle; break;
    }
    const double R = r.layout.circumradius;
    const double want = 8.0 * R;
    auto cells = static_cast<std::size_t>(std::ceil(want / r.raster.pitch));
    cells += cells % 2;
    const double w = static_cast<double>(cells) * r.raster.pitch;
    MaskLayout l;
    l.region = {{0.0, 0.0}, {w, w}};
    l.lattice = r.layout.lattice;
    l.apertures = {{shape, R, {0.5 * w, 0.5 * w}, 0.0}};
    return l;
}

/// Aerial image of the isolated reference aperture at one gap.
inline Grid2<double> reference_aerial(const Recipe& r, double gap_um, int threads = 1) {
    Grid2<double> trans = rasterize(reference_aperture_layout(r), r.raster);
    return aerial_image(trans, r.source.make(), gap_um, r.prop, threads);
}

}  // namespace proxlith
