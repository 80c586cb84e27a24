#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace mitig {

// Worker cap: MITIG_WORKERS env var, else hardware concurrency.
inline int default_workers() {
    if (const char* env = std::getenv("MITIG_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? (int)hw : 1;
}

// Runs fn(i) for i in [0, count) across workers. Callers make fn(i) depend
// only on i (per-index random streams) and write to slot i of preallocated
// buffers, so results are identical for any worker count.
inline void parallel_for(int64_t count, const std::function<void(int64_t)>& fn,
                         int workers = 0) {
    if (workers <= 0) workers = default_workers();
    workers = (int)std::min<int64_t>(workers, count);
    if (workers <= 1) {
        for (int64_t i = 0; i < count; i++) fn(i);
        return;
    }
    std::atomic<int64_t> next(0);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::atomic<bool> failed(false);
    for (int t = 0; t < workers; t++) {
        pool.emplace_back([&]() {
            constexpr int64_t kChunk = 16;
            for (;;) {
                int64_t begin = next.fetch_add(kChunk);
                if (begin >= count || failed.load(std::memory_order_relaxed)) break;
                int64_t end = std::min(begin + kChunk, count);
                for (int64_t i = begin; i < end; i++) {
                    try {
                        fn(i);
                    } catch (...) {
                        if (!failed.exchange(true)) error = std::current_exception();
                        return;
                    }
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace mitig
