#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace hgrcli {

inline int worker_count(int n_items) {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("HGR_THREADS")) {
        const int requested = std::atoi(env);
        if (requested >= 1) cap = requested;
    }
    return std::min(cap, n_items);
}

// Runs fn(0..n-1) on a bounded pool. Items write into index-addressed slots,
// so scheduling never changes output ordering.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = worker_count(n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace hgrcli
