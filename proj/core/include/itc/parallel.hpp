#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace itc {

/// Runs fn(0) .. fn(count - 1) on up to `workers` threads. Every index runs
/// even if another throws; the exception of the lowest failing index is
/// rethrown afterwards so failures are reported deterministically.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    if (count == 0) return;
    std::vector<std::exception_ptr> errors(count);
    workers = std::clamp<std::size_t>(workers, 1, count);

    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (auto i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }

    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace itc
