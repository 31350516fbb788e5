#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rai {

namespace detail {
inline unsigned& max_threads_ref() {
    static unsigned n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}
inline bool& in_parallel_region() {
    thread_local bool inside = false;
    return inside;
}
} // namespace detail

inline void set_max_threads(unsigned n) { detail::max_threads_ref() = std::max(1u, n); }
inline unsigned max_threads() { return detail::max_threads_ref(); }

/// Run fn(i) for i in [0, n). Work is split into contiguous blocks; fn must
/// only write to state owned by index i, so results are identical for any
/// thread count (reductions are done afterwards in index order).
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned threads = std::min<std::size_t>(max_threads(), n);
    if (threads <= 1 || n < 2 || detail::in_parallel_region()) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> fail_count{0};
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::size_t block = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t lo = t * block;
        std::size_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            detail::in_parallel_region() = true;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                if (fail_count.fetch_add(1) == 0) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace rai
