// SPDX-License-Identifier: MIT
/// @file parallel.hpp
/// @brief Fixed-chunk parallel loops with partition-independent reductions

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lvcal {

/// Paths per work item. Reductions are combined chunk by chunk in index order,
/// so results do not depend on the number of worker threads.
inline constexpr std::size_t kChunkSize = 4096;

/// Worker cap for the whole process; 0 means hardware concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Calls fn(chunk_index, begin, end) for every chunk of [0, n).
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Runs fn(i) for i in [0, count), one task per index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Chunked reduction: partials computed in parallel, summed in chunk order.
template <class T, class Fn>
T chunked_reduce(std::size_t n, Fn&& fn) {
    const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
    std::vector<T> partial(chunks);
    parallel_chunks(n, [&](std::size_t c, std::size_t b, std::size_t e) { partial[c] = fn(b, e); });
    T total{};
    for (const T& p : partial) total += p;
    return total;
}

}  // namespace lvcal
