#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace besovlab {

/// Worker count from BESOVLAB_WORKERS, or 1 when unset or malformed.
std::size_t default_workers();

/// Runs body(i) for i in [0, n) on `workers` threads using contiguous static
/// chunks. Bodies must write only to slots owned by their index. The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

/// Splits [0, n) into at most `workers` contiguous chunks and runs
/// body(begin, end) once per chunk, so each chunk can own scratch buffers.
void parallel_chunks(std::size_t n, std::size_t workers,
                     const std::function<void(std::size_t, std::size_t)>& body);

/// Sum in a fixed pairwise-tree order, so the result depends only on the
/// input order and never on how the values were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace besovlab
