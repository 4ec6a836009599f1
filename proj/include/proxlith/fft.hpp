#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace proxlith {

/// Smallest even integer >= n with no prime factor above 7 (fast FFT size).
inline std::size_t fast_fft_size(std::size_t n) {
    if (n < 2) return 2;
    for (std::size_t m = n + (n % 2);; m += 2) {
        std::size_t r = m;
        for (std::size_t p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

namespace fftdetail {

struct PlanKey {
    std::size_t nx, ny;
    int sign;
    bool operator<(const PlanKey& o) const {
        if (nx != o.nx) return nx < o.nx;
        if (ny != o.ny) return ny < o.ny;
        return sign < o.sign;
    }
};

// FFTW planning and plan destruction are not thread-safe; execution via
// fftw_execute_dft on distinct buffers is. Plans use FFTW_ESTIMATE so the
// transforms are deterministic and planning never touches the input.
class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    fftw_plan get(std::size_t nx, std::size_t ny, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        PlanKey key{nx, ny, sign};
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        fftw_complex* tmp = fftw_alloc_complex(nx * ny);
        if (!tmp) throw std::bad_alloc();
        fftw_plan p = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), tmp,
                                       tmp, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(tmp);
        if (!p) throw std::runtime_error("fftw_plan_dft_2d failed");
        plans_.emplace(key, p);
        return p;
    }

  private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mu_;
    std::map<PlanKey, fftw_plan> plans_;
};

}  // namespace fftdetail

/// In-place 2D DFT over a row-major nx-by-ny buffer.
/// sign -1: forward (no scaling); sign +1: inverse, scaled by 1/(nx*ny).
inline void fft2_inplace(std::complex<double>* data, std::size_t nx, std::size_t ny,
                         int sign) {
    fftw_plan p = fftdetail::PlanCache::instance().get(nx, ny, sign);
    auto* raw = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, raw, raw);
    if (sign == FFTW_BACKWARD) {
        const double s = 1.0 / (static_cast<double>(nx) * static_cast<double>(ny));
        const std::size_t n = nx * ny;
        for (std::size_t i = 0; i < n; ++i) data[i] *= s;
    }
}

inline void fft2_forward(std::complex<double>* data, std::size_t nx, std::size_t ny) {
    fft2_inplace(data, nx, ny, FFTW_FORWARD);
}

inline void fft2_inverse(std::complex<double>* data, std::size_t nx, std::size_t ny) {
    fft2_inplace(data, nx, ny, FFTW_BACKWARD);
}

}  // namespace proxlith
