#pragma once

#include <cstddef>
#include <functional>

namespace chaselab {

// Worker count for per-center loops. Results never depend on it: every
// parallel loop writes into per-index slots and reduces in index order.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace chaselab
