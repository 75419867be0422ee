#ifndef HSSD_PARALLEL_HPP
#define HSSD_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace hssd {

// Runs fn(i) for i in [0, n). Work units must be independent and write only
// to their own index slot; then the result is identical for any thread
// count. The first exception thrown by a worker is rethrown on the caller.
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    threads = std::max(1, std::min<long>(threads, n));
    if (threads == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (long i = t; i < n; i += threads) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace hssd

#endif // HSSD_PARALLEL_HPP
