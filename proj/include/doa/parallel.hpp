#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace doa {

/// Default worker count: the hardware concurrency, at least one.
inline std::size_t default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

/// Calls fn(i) for every i in [0, n) on up to `workers` threads. Tasks are
/// handed out dynamically; callers write results by index so the outcome does
/// not depend on scheduling. The exception of the lowest failing index is
/// rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::size_t failed_index = n;
    std::exception_ptr error;

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    error = std::current_exception();
                }
                failed = true;
            }
        }
    };
    const std::size_t count = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(count - 1);
    for (std::size_t k = 1; k < count; ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace doa
