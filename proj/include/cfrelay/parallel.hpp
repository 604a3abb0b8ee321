// SPDX-License-Identifier: Apache-2.0

#ifndef CFRELAY_PARALLEL_HPP
#define CFRELAY_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cfrelay
{

/// Calls fn(i) for i in [0, n) on up to hardware_concurrency threads. Each
/// index must write only to its own output slot; callers reduce afterwards
/// in index order so results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn &&fn)
{
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, n);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
    {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi)
            break;
        pool.emplace_back([&, lo, hi] {
            try
            {
                for (std::size_t i = lo; i < hi; ++i)
                    fn(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace cfrelay

#endif
