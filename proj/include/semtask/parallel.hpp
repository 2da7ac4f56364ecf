#pragma once

#include <cstddef>
#include <functional>

namespace semtask {

/// Worker count from SEMTASK_THREADS, else hardware concurrency (min 1).
unsigned default_thread_count();

/// Calls body(i) for every i in [0, count), split into contiguous chunks
/// over `threads` workers. The body must only write to slots owned by i.
/// The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace semtask
