#pragma once

#include <cstddef>
#include <functional>

namespace masskit {

// Process-wide worker count used by data-parallel sweeps. 1 means inline.
void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [0, n) over contiguous static chunks. Each index is
// visited exactly once; callers write per-index outputs only, so results do
// not depend on the partition.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace masskit
