#pragma once

#include <cstdint>
#include <functional>

namespace poseidon::par {

// Worker count used by parallel_for. Defaults to hardware_concurrency.
void set_jobs(int n);
int jobs();

// Runs body(begin, end) over a static partition of [0, n). Every index is
// processed by exactly one worker with the same serial inner loop, so
// results are bit-identical for any job count as long as workers write to
// disjoint locations. Ranges smaller than min_grain stay on the caller.
void parallel_for(std::int64_t n, std::int64_t min_grain,
                  const std::function<void(std::int64_t, std::int64_t)>& body);

} // namespace poseidon::par
