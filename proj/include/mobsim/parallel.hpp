#pragma once

// Deterministic work partitioning. Work is split into contiguous index
// ranges that write to disjoint, preallocated output slots, so the combined
// result is identical for any thread count. Thread count affects wall time
// only, never bytes.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mobsim {

// Runs fn(begin, end) over a partition of [0, total) into at most n_threads
// contiguous ranges. fn must only touch state owned by its range.
template <typename Fn>
void for_ranges(std::size_t total, unsigned n_threads, Fn&& fn) {
    if (total == 0) return;
    n_threads = std::max(1u, n_threads);
    const std::size_t chunks = std::min<std::size_t>(n_threads, total);
    if (chunks == 1) {
        fn(std::size_t{0}, total);
        return;
    }
    const std::size_t base = total / chunks;
    const std::size_t extra = total % chunks;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(chunks);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        const std::size_t end = begin + len;
        pool.emplace_back([&fn, &errors, c, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mobsim
