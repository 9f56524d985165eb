#pragma once

#include <cstdint>
#include <functional>

namespace cvreg {

// Worker cap for parallel_for. 0 restores machine parallelism.
void set_max_threads(int n);
int max_threads();

// Runs fn over contiguous index sub-ranges on up to max_threads() workers.
// Callers only ever write disjoint outputs per index, so results do not
// depend on the partitioning.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

} // namespace cvreg
