// parallel.hpp — index-parallel loop with a worker cap from BERRYTHERM_THREADS

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace berrytherm {

inline int worker_count() {
    int n = int(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("BERRYTHERM_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) n = std::min(n, cap);
        } catch (...) {
        }
    }
    return n;
}

// Calls f(i) for i in [0, n). Results must be written to per-index slots so the
// outcome does not depend on scheduling. The exception of the lowest failing
// index is rethrown.
template <class F>
void parallel_for(int n, F&& f, int workers = 0) {
    if (n <= 0) return;
    if (workers <= 0) workers = worker_count();
    workers = std::min(workers, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    int failed_at = n;
    std::exception_ptr failure;
    auto body = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace berrytherm
