#pragma once

#include <cstddef>
#include <functional>

namespace charflow {

/// Worker count: explicit override, else CHARFLOW_THREADS, else hardware concurrency.
std::size_t thread_count();

/// Overrides the worker count for this process; 0 restores the default lookup.
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n) over static contiguous chunks. Output written
/// per index is independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace charflow
