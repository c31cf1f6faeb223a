// parallel.hpp - row-sliced parallel loop helper.
//
// Every per-pixel loop in the library writes to disjoint outputs, so slicing
// rows across threads does not change results. The global thread cap is set
// once by the CLI (--threads) and defaults to 1.
#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace usreg {

inline int& thread_cap() {
    static int cap = 1;
    return cap;
}

inline void set_thread_cap(int n) { thread_cap() = std::max(1, n); }

// Invokes fn(i) for i in [begin, end).
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn) {
    const int n = end - begin;
    const int threads = std::min(thread_cap(), n);
    if (threads <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = begin + t * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace usreg
