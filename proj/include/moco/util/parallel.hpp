#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace moco {

// Runs fn(i) for i in [0, n). With threads <= 1 runs inline; otherwise uses
// static block partitioning. Work items must not share mutable state; callers
// merge results in index order so thread count never affects output.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t nt = std::min<size_t>(static_cast<size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (size_t i = t; i < n; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace moco
