#pragma once

#include <cstdint>
#include <functional>

namespace nocollide {

// Global thread budget consumed by batch operations. Defaults to the
// hardware concurrency; NOCOLLIDE_THREADS overrides it at startup.
int thread_budget();
void set_thread_budget(int n);

// Runs f(i) for i in [begin, end) on up to thread_budget() threads.
// Iterations are partitioned statically so results are identical to the
// sequential order as long as each iteration writes to its own slots.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& f);

}  // namespace nocollide
