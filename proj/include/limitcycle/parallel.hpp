// parallel.hpp: minimal work pool for independent tasks.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace limitcycle {

// LIMITCYCLE_JOBS if set, else the hardware concurrency.
inline int default_jobs() {
    if (const char* env = std::getenv("LIMITCYCLE_JOBS")) {
        try {
            const int j = std::stoi(env);
            if (j >= 1) return j;
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Calls f(i) for i in [0, n) on up to `jobs` threads. The first exception is rethrown
// after all workers stop; remaining indices are skipped once one has failed.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::min<std::size_t>(n, 1024))));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace limitcycle
