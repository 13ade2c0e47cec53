#pragma once

#include <cstdint>
#include <functional>

namespace sfs {

// Worker count: SFSKIT_THREADS when set (>= 1), otherwise the hardware
// concurrency.
int thread_count();

// Runs f(i) for i in [0, n) across threads. Nested calls run serially, so
// callers never oversubscribe. Tasks must be independent; any exception is
// rethrown on the calling thread. Results must be written to
// caller-allocated slots indexed by i, which keeps every computation
// deterministic regardless of scheduling.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f);

}  // namespace sfs
