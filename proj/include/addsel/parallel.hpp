#pragma once

#include <cstddef>
#include <functional>

namespace addsel {

// Worker count: ADDSEL_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t thread_count();

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// handled exactly once; the first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t threads = thread_count());

}  // namespace addsel
