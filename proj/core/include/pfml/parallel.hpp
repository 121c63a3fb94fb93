#pragma once

#include <cstddef>
#include <functional>

namespace pfml {

/// Runs fn(0..count-1) on up to `workers` threads (0: hardware concurrency).
/// Work items must write only to their own outputs. The first exception thrown
/// by any item is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace pfml
