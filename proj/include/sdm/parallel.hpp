#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sdm {

/// Runs fn(begin, end) over [0, n) split into `threads` contiguous chunks.
///
/// Chunks are disjoint and every index is handled by exactly one call, so any
/// computation whose per-index result does not depend on the chunking is
/// bit-identical for every thread count. The first exception thrown by a
/// worker is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2 * workers) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) continue;
            pool.emplace_back([&fn, &errors, w, begin, end] {
                try {
                    fn(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        try {
            fn(std::size_t{0}, std::min(n, chunk));
        } catch (...) {
            errors[0] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace sdm
