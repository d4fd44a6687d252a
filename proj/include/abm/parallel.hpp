#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace abm {

// Runs body(worker, index) for index in [0, n). Workers take contiguous chunks, so a
// body that only writes to slot `index` (plus per-worker scratch) is race free.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    const std::size_t workers =
        threads <= 1 || n < 2 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (workers == 1) {
        for (std::size_t k = 0; k < n; ++k) body(std::size_t{0}, k);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t k = begin; k < end; ++k) body(w, k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::size_t worker_count(std::size_t n, int threads) {
    if (threads <= 1 || n < 2) return 1;
    return std::min<std::size_t>(static_cast<std::size_t>(threads), n);
}

}  // namespace abm
