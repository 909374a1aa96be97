#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace proxima {

/// Resolve a thread-count request: 0 means "use the hardware".
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Run body(i) for i in [0, count) across at most `threads` threads.
///
/// Work is split into contiguous blocks by index, so results written to
/// pre-sized slots are identical for any thread count. Exceptions thrown by
/// the body are captured and the first one rethrown on the calling thread.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
    threads = resolve_threads(threads);
    if (count == 0) return;
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    const std::size_t workers = std::min<std::size_t>(threads, count);
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto run_block = [&](std::size_t begin, std::size_t end) {
        try {
            for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t base = count / workers;
    const std::size_t extra = count % workers;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t len = base + (w < extra ? 1 : 0);
        pool.emplace_back(run_block, begin, begin + len);
        begin += len;
    }
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace proxima
