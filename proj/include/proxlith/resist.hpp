#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "proxlith/grid.hpp"
#include "proxlith/wave_optics.hpp"

namespace proxlith {

/// Negative-resist response. Height is the resist remaining after develop,
/// in [0, thickness]: unexposed regions wash out completely.
///
/// Exactly one response mode is active: with absorption = 0 the height
/// follows a power-law contrast curve between threshold and saturation;
/// with absorption > 0 the crosslink depth is limited by Beer-Lambert
/// attenuation instead.
struct ResistRecipe {
    double thickness_um = 35.0;
    double exposure_s = 16.0;
    double dose_threshold = 40.0;   // mJ/cm2, gelation onset
    double dose_saturation = 200.0; // mJ/cm2, full crosslink
    double gamma = 1.0;             // contrast exponent
    double absorption = 0.0;        // 1/um; > 0 selects the depth-limited mode
    double blur_sigma_um = 0.0;     // lateral dose diffusion before develop

    bool depth_limited() const { return absorption > 0.0; }

    void validate() const {
        if (!(thickness_um > 0.0)) throw std::invalid_argument("resist: thickness must be > 0");
        if (!(exposure_s > 0.0)) throw std::invalid_argument("resist: exposure_time must be > 0");
        if (!(dose_threshold > 0.0))
            throw std::invalid_argument("resist: dose_threshold must be > 0");
        if (!(dose_saturation > dose_threshold))
            throw std::invalid_argument("resist: dose_saturation must exceed dose_threshold");
        if (!(gamma > 0.0)) throw std::invalid_argument("resist: gamma must be > 0");
        if (absorption < 0.0) throw std::invalid_argument("resist: absorption must be >= 0");
        if (blur_sigma_um < 0.0) throw std::invalid_argument("resist: blur_sigma must be >= 0");
    }

    /// Developed height for a single dose value. Monotone, continuous at the
    /// threshold and saturation knees.
    double height_of(double dose) const {
        if (dose <= dose_threshold) return 0.0;
        if (depth_limited())
            return std::min(thickness_um, std::log(dose / dose_threshold) / absorption);
        double t = (dose - dose_threshold) / (dose_saturation - dose_threshold);
        return thickness_um * std::pow(std::min(1.0, t), gamma);
    }
};

/// dose [mJ/cm2] = relative intensity * power [mW/cm2] * exposure [s]
inline Grid2<double> accumulate_dose(const Grid2<double>& intensity, const SourceSpec& source,
                                     const ResistRecipe& resist) {
    if (!(source.power_mw_per_cm2 > 0.0))
        throw std::invalid_argument("accumulate_dose: source power must be > 0");
    if (!(resist.exposure_s > 0.0))
        throw std::invalid_argument("accumulate_dose: exposure time must be > 0");
    Grid2<double> dose = intensity;
    const double s = source.power_mw_per_cm2 * resist.exposure_s;
    for (double& v : dose.data) v *= s;
    return dose;
}

/// Separable Gaussian blur with mirrored boundaries; kernel truncated at 4
/// sigma and renormalized, so a uniform field passes through unchanged.
inline Grid2<double> blur_dose(const Grid2<double>& dose, double sigma_um) {
    if (sigma_um < 0.0) throw std::invalid_argument("blur_dose: sigma must be >= 0");
    if (sigma_um == 0.0) return dose;
    const auto radius = static_cast<long>(std::ceil(4.0 * sigma_um / dose.pitch));
    std::vector<double> k(static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (long i = 0; i <= radius; ++i) {
        double x = static_cast<double>(i) * dose.pitch;
        k[static_cast<std::size_t>(i)] = std::exp(-0.5 * (x * x) / (sigma_um * sigma_um));
        sum += (i == 0 ? 1.0 : 2.0) * k[static_cast<std::size_t>(i)];
    }
    for (double& v : k) v /= sum;

    auto reflect = [](long i, long n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return static_cast<std::size_t>(i);
    };

    const auto nx = static_cast<long>(dose.nx), ny = static_cast<long>(dose.ny);
    Grid2<double> tmp = dose, out = dose;
    for (long j = 0; j < ny; ++j)
        for (long i = 0; i < nx; ++i) {
            double acc = k[0] * dose.data[static_cast<std::size_t>(j * nx + i)];
            for (long d = 1; d <= radius; ++d)
                acc += k[static_cast<std::size_t>(d)] *
                       (dose.data[static_cast<std::size_t>(j) * dose.nx + reflect(i - d, nx)] +
                        dose.data[static_cast<std::size_t>(j) * dose.nx + reflect(i + d, nx)]);
            tmp.data[static_cast<std::size_t>(j * nx + i)] = acc;
        }
    for (long j = 0; j < ny; ++j)
        for (long i = 0; i < nx; ++i) {
            double acc = k[0] * tmp.data[static_cast<std::size_t>(j * nx + i)];
            for (long d = 1; d <= radius; ++d)
                acc += k[static_cast<std::size_t>(d)] *
                       (tmp.data[reflect(j - d, ny) * dose.nx + static_cast<std::size_t>(i)] +
                        tmp.data[reflect(j + d, ny) * dose.nx + static_cast<std::size_t>(i)]);
            out.data[static_cast<std::size_t>(j * nx + i)] = acc;
        }
    return out;
}

/// Developed surface height, pointwise through the resist response.
inline Grid2<double> develop(const Grid2<double>& dose, const ResistRecipe& resist) {
    resist.validate();
    Grid2<double> h = dose;
    for (double& v : h.data) v = resist.height_of(v);
    return h;
}

}  // namespace proxlith
