#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace proxlith {

/// Run f(i) for i in [0, n). Tasks are independent; callers are responsible
/// for writing results into pre-sized slots so that output order never
/// depends on the thread count. max_threads <= 1 runs inline.
template <class F>
inline void parallel_for(std::size_t n, unsigned max_threads, F&& f) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned nthreads = max_threads == 0 ? hw : std::min(max_threads, hw);
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, n));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace proxlith
