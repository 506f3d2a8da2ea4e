#pragma once

#include <cstddef>
#include <functional>

namespace hartree_lab {

/// Worker threads to use: HARTREE_LAB_THREADS if set to a positive integer,
/// otherwise the hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) across worker_count() threads. The first
/// exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)> &body);

} // namespace hartree_lab
