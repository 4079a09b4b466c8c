#pragma once

#include <cstddef>
#include <functional>

namespace violin {

// Worker count: VIOLIN_THREADS if set, otherwise hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Runs body(i) for i in [0, n). Work is split into fixed chunks independent of
// the thread count, so callers that reduce per-index results in index order get
// identical output for any number of workers. Nested calls run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace violin
