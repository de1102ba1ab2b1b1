#pragma once

#include <cstddef>
#include <functional>

namespace hml {

/// Replica-level worker pool. Results must be written to per-index slots;
/// scheduling order is then irrelevant and outputs are identical for any
/// thread budget.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

void set_thread_budget(int n);  // 0 restores the automatic choice
int thread_budget();

}  // namespace hml
