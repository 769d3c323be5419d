#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bvi {

/// Worker count: hardware concurrency capped by BOOSTVI_THREADS.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index must touch only its own output
/// slot; results are then independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Deterministic pairwise summation (fixed tree keyed by index).
double pairwise_sum(std::span<const double> xs);

} // namespace bvi
