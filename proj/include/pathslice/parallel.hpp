#pragma once

#include <cstddef>
#include <functional>

namespace pathslice {

// Worker count used by the field kernels; 1 runs inline.
void set_num_threads(int k);
int num_threads();

// Runs body(i) for i in [0, count). Each index is handled by exactly one worker, so results
// depend only on the per-index computation and never on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace pathslice
