#pragma once

#include <functional>

namespace ulab {

// Runs fn(0), ..., fn(count-1) split into contiguous chunks over at most
// `threads` std::threads. Each task must write only its own output slot;
// aggregation stays with the caller, in index order, so results are identical
// for every thread count. The first thrown exception (lowest chunk index)
// is rethrown after all threads join.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace ulab
