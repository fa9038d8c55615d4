#pragma once

#include <cstddef>
#include <functional>

namespace corrugate {

/// Worker count: CORRUGATE_THREADS if set and positive, else hardware default.
unsigned worker_count();

/// Runs body(begin, end) over disjoint chunks of [0, count). Each index is
/// visited exactly once, so bodies that write only to their own indices give
/// results independent of the thread count.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Deterministic max-reduction of f(i) over [0, count); -inf when empty.
double parallel_max(std::size_t count, const std::function<double(std::size_t)>& f);

}  // namespace corrugate
