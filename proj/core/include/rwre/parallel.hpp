#pragma once

#include <cstddef>
#include <functional>

namespace rwre {

// Runs fn(replica) for replica = 0..count-1 on `workers` threads pulling
// from a shared index queue. Replica work must be independent; callers
// aggregate per-replica results in index order afterwards, which keeps
// every downstream number independent of the worker count.
void parallel_replicas(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace rwre
