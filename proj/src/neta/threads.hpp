#pragma once

#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

namespace neta {

// NETA_DETERMINISTIC=1 forces one thread; NETA_THREADS caps the pool.
inline int thread_budget() {
    const char* det = std::getenv("NETA_DETERMINISTIC");
    if (det && std::strcmp(det, "1") == 0) return 1;
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* cap = std::getenv("NETA_THREADS")) {
        const long v = std::strtol(cap, nullptr, 10);
        if (v >= 1 && static_cast<unsigned>(v) < n) n = static_cast<unsigned>(v);
    }
    return static_cast<int>(n);
}

// Static block split; f(i) must write only to slot i of any shared output,
// which keeps results independent of the schedule.
template <typename F>
void parallel_for(std::int64_t n, F f) {
    const int workers = thread_budget();
    if (workers <= 1 || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (std::int64_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace neta
