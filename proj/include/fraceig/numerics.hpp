#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fraceig {

/// Width of the sequential blocks used by pairwise_sum.
inline constexpr std::size_t kSumBlock = 256;

/// Deterministic summation: ascending index inside blocks of 256, then a
/// pairwise tree over the block sums. Every reduction in the library goes
/// through this so results do not depend on thread count.
double pairwise_sum(std::span<const double> values);

/// pairwise_sum of term(i) for i in [0, n).
double pairwise_sum(std::size_t n, const std::function<double(std::size_t)>& term);

double dot(std::span<const double> a, std::span<const double> b);

/// Σ m_i a_i b_i.
double weighted_dot(std::span<const double> m, std::span<const double> a, std::span<const double> b);

double max_abs(std::span<const double> v);

/// Number of worker threads: hardware concurrency capped by FRACEIG_THREADS.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) across thread_count() workers. Each index is
/// processed exactly once; callers must write only to index-owned slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fraceig
