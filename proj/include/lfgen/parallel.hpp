#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace lfgen {

/// Runs body(i) for i in [0, count) on up to `threads` workers, striding the
/// index range. Results must be written to per-index slots so the outcome does
/// not depend on the thread count.
template <class F>
void parallel_for(int count, int threads, F&& body)
{
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < count; i += threads)
                body(i);
        });
    for (auto& th : pool)
        th.join();
}

} // namespace lfgen
