#ifndef MOTIVE_HEIGHT_PARALLEL_HPP
#define MOTIVE_HEIGHT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace motive_height
{

/// Applies f to every item on up to `threads` workers; results keep input
/// order whatever the completion order. The first exception is rethrown.
template <typename T, typename F>
auto parallel_map(const std::vector<T> &items, F f, unsigned threads = 0)
    -> std::vector<decltype(f(items.front()))>
{
    using R = decltype(f(items.front()));
    std::vector<R> out(items.size());
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, items.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < items.size(); ++i) {
            out[i] = f(items[i]);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(items.size());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < items.size(); i = next++) {
                try {
                    out[i] = f(items[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

} // namespace motive_height

#endif
