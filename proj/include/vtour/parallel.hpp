#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vtour::detail {

// Runs fn(row) for every row in [0, rows), split into contiguous bands across
// worker threads. threads == 0 picks the hardware concurrency. Each row is
// processed exactly once, so output is independent of the thread count.
template <typename Fn>
void parallel_rows(std::int64_t rows, unsigned threads, Fn&& fn) {
    constexpr std::int64_t kMinRowsPerThread = 16;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto max_useful = static_cast<unsigned>(std::max<std::int64_t>(1, rows / kMinRowsPerThread));
    threads = std::min(threads, max_useful);
    if (threads <= 1) {
        for (std::int64_t r = 0; r < rows; ++r) fn(r);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            const std::int64_t begin = rows * t / threads;
            const std::int64_t end = rows * (t + 1) / threads;
            workers.emplace_back([&, begin, end] {
                try {
                    for (std::int64_t r = begin; r < end; ++r) fn(r);
                } catch (...) {
                    std::scoped_lock lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace vtour::detail
