#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxlith/fft.hpp"
#include "proxlith/grid.hpp"
#include "proxlith/parallel.hpp"

namespace proxlith {

struct SpectralLine {
    double wavelength_um = 0.405;
    double weight = 1.0;
};

/// Illumination: a set of incoherent spectral lines plus the lamp's power
/// density at the mask plane. Line weights are normalized internally.
struct SourceSpec {
    std::vector<SpectralLine> lines;
    double power_mw_per_cm2 = 10.0;

    static SourceSpec monochromatic(double lambda_um, double power = 10.0) {
        SourceSpec s;
        s.lines = {{lambda_um, 1.0}};
        s.power_mw_per_cm2 = power;
        return s;
    }

    /// n lines evenly spaced over [lo, hi] (endpoints included), equal weights.
    static SourceSpec uniform_band(double lo_um, double hi_um, int n, double power = 10.0) {
        if (n < 1) throw std::invalid_argument("uniform_band: need n >= 1");
        if (!(lo_um > 0.0) || hi_um < lo_um)
            throw std::invalid_argument("uniform_band: bad wavelength range");
        SourceSpec s;
        s.power_mw_per_cm2 = power;
        if (n == 1) {
            s.lines = {{0.5 * (lo_um + hi_um), 1.0}};
            return s;
        }
        for (int i = 0; i < n; ++i)
            s.lines.push_back(
                {lo_um + (hi_um - lo_um) * static_cast<double>(i) / (n - 1.0),
                 1.0 / static_cast<double>(n)});
        return s;
    }

    double weight_sum() const {
        double w = 0.0;
        for (const auto& l : lines) w += l.weight;
        return w;
    }
};

struct PropagationOptions {
    std::size_t max_grid = 8192;       // hard cap on the padded FFT size per axis
    double spectral_power_tail = 1e-4; // power fraction allowed beyond the cutoff
};

/// Diagnostics from one propagation (padding decisions).
struct PaddingReport {
    std::size_t nx_padded = 0, ny_padded = 0;
    double cutoff_freq = 0.0;    // 1/um, radial
    double half_angle_rad = 0.0; // asin(lambda * cutoff)
    double pad_extent_um = 0.0;  // guard band added per side
};

namespace wavedetail {

/// DFT sample frequency for index m of n samples at the given pitch.
inline double dft_freq(std::size_t m, std::size_t n, double pitch) {
    auto mm = static_cast<long long>(m);
    auto nn = static_cast<long long>(n);
    if (mm >= (nn + 1) / 2) mm -= nn;
    return static_cast<double>(mm) / (static_cast<double>(n) * pitch);
}

/// Multiply a frequency-domain buffer by the exact scalar transfer function
/// for distance z: phase rotation for propagating components, exponential
/// decay for evanescent ones.
inline void apply_transfer(std::complex<double>* buf, std::size_t nx, std::size_t ny,
                           double pitch, double lambda_um, double z_um) {
    const double inv_l2 = 1.0 / (lambda_um * lambda_um);
    const double two_pi_z = 2.0 * M_PI * z_um;
    for (std::size_t j = 0; j < ny; ++j) {
        const double fy = dft_freq(j, ny, pitch);
        for (std::size_t i = 0; i < nx; ++i) {
            const double fx = dft_freq(i, nx, pitch);
            const double f2 = fx * fx + fy * fy;
            std::complex<double>& c = buf[j * nx + i];
            if (f2 <= inv_l2) {
                const double kz = two_pi_z * std::sqrt(inv_l2 - f2);
                c *= std::complex<double>(std::cos(kz), std::sin(kz));
            } else {
                c *= std::exp(-two_pi_z * std::sqrt(f2 - inv_l2));
            }
        }
    }
}

/// Radial frequency containing all but `tail` of the field's spectral power.
inline double spectral_cutoff(const Grid2<std::complex<double>>& u, double tail) {
    const std::size_t nx = u.nx, ny = u.ny;
    std::vector<std::complex<double>> buf(u.data);
    fft2_forward(buf.data(), nx, ny);

    const double df = 1.0 / (static_cast<double>(std::max(nx, ny)) * u.pitch);
    const double fmax = std::hypot(0.5 / u.pitch, 0.5 / u.pitch);
    const auto nbins = static_cast<std::size_t>(fmax / df) + 2;
    std::vector<double> hist(nbins, 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
        const double fy = dft_freq(j, ny, u.pitch);
        for (std::size_t i = 0; i < nx; ++i) {
            const double fx = dft_freq(i, nx, u.pitch);
            const double p = std::norm(buf[j * nx + i]);
            auto b = static_cast<std::size_t>(std::hypot(fx, fy) / df);
            if (b >= nbins) b = nbins - 1;
            hist[b] += p;
            total += p;
        }
    }
    if (total <= 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t b = 0; b < nbins; ++b) {
        acc += hist[b];
        if (acc >= (1.0 - tail) * total)
            return static_cast<double>(b + 1) * df;
    }
    return fmax;
}

}  // namespace wavedetail

/// Scalar angular spectrum propagation over distance z (um). Exact
/// non-paraxial transfer function; evanescent components decay
/// exponentially. The grid is zero-padded so light diffracting up to the
/// field's own spectral half-angle cannot wrap around the edges, then
/// cropped back to the input geometry.
///
/// Throws if the padded grid would exceed opt.max_grid; the message reports
/// the largest propagation distance the cap permits for this field.
[[nodiscard]] inline Grid2<std::complex<double>> propagate_field(const Grid2<std::complex<double>>& u0,
                                                   double lambda_um, double z_um,
                                                   const PropagationOptions& opt = {},
                                                   PaddingReport* report = nullptr) {
    if (!(lambda_um > 0.0)) throw std::invalid_argument("propagate_field: lambda must be > 0");
    if (z_um < 0.0) throw std::invalid_argument("propagate_field: z must be >= 0");
    if (u0.nx < 2 || u0.ny < 2) throw std::invalid_argument("propagate_field: grid too small");
    if (u0.nx % 2 != 0 || u0.ny % 2 != 0)
        throw std::invalid_argument("propagate_field: grid dimensions must be even");
    if (z_um == 0.0) {
        if (report) *report = {u0.nx, u0.ny, 0.0, 0.0, 0.0};
        return u0;
    }

    const double fc = wavedetail::spectral_cutoff(u0, opt.spectral_power_tail);
    const double sin_t = std::min(lambda_um * fc, 0.999999);
    const double tan_t = sin_t / std::sqrt(1.0 - sin_t * sin_t);
    const double pad_extent = z_um * tan_t;
    const auto pad_cells = static_cast<std::size_t>(std::ceil(pad_extent / u0.pitch));

    const std::size_t nx_p = fast_fft_size(u0.nx + 2 * pad_cells);
    const std::size_t ny_p = fast_fft_size(u0.ny + 2 * pad_cells);
    if (nx_p > opt.max_grid || ny_p > opt.max_grid) {
        const std::size_t room = opt.max_grid - std::min(opt.max_grid, std::max(u0.nx, u0.ny));
        const double max_gap = tan_t > 0.0
                                   ? (static_cast<double>(room) / 2.0) * u0.pitch / tan_t
                                   : 0.0;
        throw std::runtime_error(
            "propagate_field: gap " + std::to_string(z_um) + " um needs a padded grid of " +
            std::to_string(std::max(nx_p, ny_p)) + " (cap " + std::to_string(opt.max_grid) +
            "); at this pitch and spectrum the cap allows gaps up to about " +
            std::to_string(max_gap) + " um");
    }
    if (report) *report = {nx_p, ny_p, fc, std::asin(sin_t), pad_extent};

    std::vector<std::complex<double>> buf(nx_p * ny_p, {0.0, 0.0});
    const std::size_t ox = (nx_p - u0.nx) / 2, oy = (ny_p - u0.ny) / 2;
    for (std::size_t j = 0; j < u0.ny; ++j)
        for (std::size_t i = 0; i < u0.nx; ++i)
            buf[(j + oy) * nx_p + (i + ox)] = u0.data[j * u0.nx + i];

    fft2_forward(buf.data(), nx_p, ny_p);
    wavedetail::apply_transfer(buf.data(), nx_p, ny_p, u0.pitch, lambda_um, z_um);
    fft2_inverse(buf.data(), nx_p, ny_p);

    Grid2<std::complex<double>> out(u0.nx, u0.ny, u0.pitch, u0.origin);
    for (std::size_t j = 0; j < u0.ny; ++j)
        for (std::size_t i = 0; i < u0.nx; ++i)
            out.data[j * u0.nx + i] = buf[(j + oy) * nx_p + (i + ox)];
    return out;
}

/// Angular spectrum propagation with periodic boundary conditions: no
/// padding, the grid is treated as one period of an infinite tiling. On a
/// field whose spectrum is purely propagating the transfer is unitary, so
/// power is conserved and propagation over z1 then z2 equals propagation
/// over z1 + z2.
[[nodiscard]] inline Grid2<std::complex<double>> propagate_periodic(const Grid2<std::complex<double>>& u0,
                                                      double lambda_um, double z_um) {
    if (!(lambda_um > 0.0))
        throw std::invalid_argument("propagate_periodic: lambda must be > 0");
    if (z_um < 0.0) throw std::invalid_argument("propagate_periodic: z must be >= 0");
    if (u0.nx < 2 || u0.ny < 2)
        throw std::invalid_argument("propagate_periodic: grid too small");
    if (u0.nx % 2 != 0 || u0.ny % 2 != 0)
        throw std::invalid_argument("propagate_periodic: grid dimensions must be even");
    if (z_um == 0.0) return u0;

    Grid2<std::complex<double>> out = u0;
    fft2_forward(out.data.data(), out.nx, out.ny);
    wavedetail::apply_transfer(out.data.data(), out.nx, out.ny, out.pitch, lambda_um, z_um);
    fft2_inverse(out.data.data(), out.nx, out.ny);
    return out;
}

/// Plane-wave illumination of an amplitude transmission mask.
inline Grid2<std::complex<double>> illuminate(const Grid2<double>& transmission) {
    Grid2<std::complex<double>> u(transmission.nx, transmission.ny, transmission.pitch,
                                  transmission.origin);
    for (std::size_t i = 0; i < u.data.size(); ++i)
        u.data[i] = {transmission.data[i], 0.0};
    return u;
}

/// Relative aerial intensity at distance `gap_um` behind the mask: the
/// weight-normalized incoherent sum of per-line intensities. An open mask
/// gives intensity 1 everywhere. Lines may run in parallel; the reduction
/// order is fixed so results do not depend on the thread count.
inline Grid2<double> aerial_image(const Grid2<double>& transmission, const SourceSpec& src,
                                  double gap_um, const PropagationOptions& opt = {},
                                  int threads = 1) {
    if (src.lines.empty()) throw std::invalid_argument("aerial_image: source has no lines");
    const double wsum = src.weight_sum();
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("aerial_image: line weights must sum to 1");

    const Grid2<std::complex<double>> u0 = illuminate(transmission);
    std::vector<Grid2<double>> per_line(src.lines.size());
    parallel_for(src.lines.size(), threads, [&](std::size_t li) {
        auto u = propagate_field(u0, src.lines[li].wavelength_um, gap_um, opt);
        Grid2<double> inten(u.nx, u.ny, u.pitch, u.origin);
        for (std::size_t i = 0; i < u.data.size(); ++i) inten.data[i] = std::norm(u.data[i]);
        per_line[li] = std::move(inten);
    });

    Grid2<double> img(transmission.nx, transmission.ny, transmission.pitch,
                      transmission.origin);
    for (std::size_t li = 0; li < src.lines.size(); ++li) {
        const double w = src.lines[li].weight / wsum;
        for (std::size_t i = 0; i < img.data.size(); ++i)
            img.data[i] += w * per_line[li].data[i];
    }
    return img;
}

}  // namespace proxlith
