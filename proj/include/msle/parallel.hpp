#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace msle {

inline int& thread_count_ref() {
    static int n = 0; // 0 = auto (hardware concurrency)
    return n;
}

inline void set_threads(int n) { thread_count_ref() = n; }

inline int threads() {
    int n = thread_count_ref();
    if (n > 0) return n;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(block_begin, block_end) over [0, n) split into fixed-size blocks.
/// Block boundaries depend only on `block`, never on the thread count, and
/// each block writes disjoint outputs, so results are thread-count-invariant.
inline void parallel_for_blocked(std::ptrdiff_t n, std::ptrdiff_t block,
                                 const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn) {
    if (n <= 0) return;
    const std::ptrdiff_t nblocks = (n + block - 1) / block;
    const int nt = std::min<std::ptrdiff_t>(threads(), nblocks);
    if (nt <= 1) {
        for (std::ptrdiff_t b = 0; b < nblocks; ++b)
            fn(b * block, std::min(n, (b + 1) * block));
        return;
    }
    std::atomic<std::ptrdiff_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                std::ptrdiff_t b = next.fetch_add(1);
                if (b >= nblocks) break;
                fn(b * block, std::min(n, (b + 1) * block));
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace msle
