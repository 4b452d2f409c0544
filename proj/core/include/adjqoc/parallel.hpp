#pragma once

#include <cstddef>
#include <functional>

namespace adjqoc {

/// Environment variable overriding the default worker count.
inline constexpr const char* kWorkerEnvVar = "ADJQOC_WORKERS";

/// Worker count from ADJQOC_WORKERS if set to a positive integer, otherwise
/// std::thread::hardware_concurrency() (at least 1).
std::size_t default_worker_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `workers`
/// threads. Chunks are at most `max_chunk` wide when `max_chunk` > 0. The
/// first exception thrown by any chunk is rethrown after all chunks finish.
void parallel_for(std::size_t n, std::size_t workers, std::size_t max_chunk,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace adjqoc
