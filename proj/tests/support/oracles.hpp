#pragma once

// Independent reference implementations used to cross-check the fast paths:
// a direct Rayleigh-Sommerfeld summation, band-limited random masks it can
// integrate accurately, and closed-form synthetic surfaces.

#include <complex>
#include <random>

#include "proxlith/proxlith.hpp"

namespace oracles {

using proxlith::Grid2;
using proxlith::Vec2;

// Rayleigh-Sommerfeld first solution evaluated by direct quadrature:
//   U(p) = (z dA / 2pi) * sum_s u0(s) e^{ik rho} (1 - ik rho) / rho^3,
// rho = |p - s|, k = 2pi/lambda. Valid while the sampled kernel stays below
// the grid Nyquist rate, i.e. k * sin(max field angle) * pitch < pi.
inline Grid2<std::complex<double>> rayleigh_sommerfeld(const Grid2<std::complex<double>>& u0,
                                                       double lambda_um, double z_um) {
    const double k = 2.0 * M_PI / lambda_um;
    const double dA = u0.pitch * u0.pitch;
    Grid2<std::complex<double>> out(u0.nx, u0.ny, u0.pitch, u0.origin);
    for (std::size_t jy = 0; jy < u0.ny; ++jy)
        for (std::size_t jx = 0; jx < u0.nx; ++jx) {
            std::complex<double> acc = 0.0;
            const double px = u0.x_of(jx), py = u0.y_of(jy);
            for (std::size_t sy = 0; sy < u0.ny; ++sy)
                for (std::size_t sx = 0; sx < u0.nx; ++sx) {
                    const double dx = px - u0.x_of(sx), dy = py - u0.y_of(sy);
                    const double r2 = dx * dx + dy * dy + z_um * z_um;
                    const double rho = std::sqrt(r2);
                    acc += u0.at(sx, sy) * std::polar(1.0, k * rho) *
                           std::complex<double>(1.0, -k * rho) / (r2 * rho);
                }
            out.at(jx, jy) = acc * (z_um * dA / (2.0 * M_PI));
        }
    return out;
}

// Seeded band-limited mask: random binary pattern smoothed to ~1 um detail
// and rolled off toward the frame edge so both the direct quadrature and the
// padded spectral propagation see the same compactly supported field.
inline Grid2<std::complex<double>> bandlimited_mask(unsigned seed, std::size_t n = 64,
                                                    double pitch = 0.25) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Grid2<double> re(n, n, pitch, {0.0, 0.0});
    for (auto& v : re.data) v = uni(rng) < 0.5 ? 1.0 : 0.0;
    re = proxlith::blur_dose(re, 4.0 * pitch);
    Grid2<std::complex<double>> u0(n, n, pitch, {0.0, 0.0});
    const Vec2 c = re.sample_domain().center();
    const double senv = 6.0 * pitch;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const double ex = re.x_of(i) - c.x, ey = re.y_of(j) - c.y;
            u0.at(i, j) = re.at(i, j) * std::exp(-(ex * ex + ey * ey) / (2.0 * senv * senv));
        }
    return u0;
}

inline double max_rel_error(const Grid2<std::complex<double>>& exact,
                            const Grid2<std::complex<double>>& got) {
    double umax = 0.0, emax = 0.0;
    for (std::size_t i = 0; i < exact.data.size(); ++i) {
        umax = std::max(umax, std::abs(exact.data[i]));
        emax = std::max(emax, std::abs(exact.data[i] - got.data[i]));
    }
    return emax / umax;
}

// Spherical cap height map: h(r) = h0 - (R - sqrt(R^2 - r^2)), clipped at 0.
inline Grid2<double> spherical_cap(std::size_t n, double pitch, double radius_um,
                                   double sag_um) {
    Grid2<double> g(n, n, pitch, {0.0, 0.0});
    const Vec2 c = g.sample_domain().center();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = g.x_of(i) - c.x, dy = g.y_of(j) - c.y;
            const double r2 = dx * dx + dy * dy;
            double h = 0.0;
            if (r2 < radius_um * radius_um) {
                const double drop = radius_um - std::sqrt(radius_um * radius_um - r2);
                h = sag_um - drop;
            }
            g.at(i, j) = std::max(0.0, h);
        }
    return g;
}

}  // namespace oracles
