#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace spinmoments {

namespace detail {
inline std::atomic<int>& thread_override() {
    static std::atomic<int> v{0};  // 0 = unset
    return v;
}
}  // namespace detail

// Thread count resolution: SPINMOMENTS_THREADS env var wins, then
// set_thread_count, then hardware concurrency.
inline void set_thread_count(int n) { detail::thread_override().store(n > 0 ? n : 0); }

inline int thread_count() {
    if (const char* env = std::getenv("SPINMOMENTS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const int o = detail::thread_override().load();
    if (o > 0) return o;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static block partition over [0, n). Each index is computed independently,
// so results do not depend on the thread count.
template <class F>
void parallel_for(std::size_t n, F&& body) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n > 0 ? n : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

// Fixed-order pairwise tree sum: deterministic regardless of thread count and
// numerically stabler than a running sum.
inline double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace spinmoments
