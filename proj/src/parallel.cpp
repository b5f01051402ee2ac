#include "nocollide/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace nocollide {

namespace {

int initial_budget() {
  if (const char* env = std::getenv("NOCOLLIDE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

std::atomic<int> g_budget{initial_budget()};

}  // namespace

int thread_budget() { return g_budget.load(); }

void set_thread_budget(int n) { g_budget.store(std::max(1, n)); }

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& f) {
  const std::int64_t count = end - begin;
  if (count <= 0) return;
  const int threads = static_cast<int>(std::min<std::int64_t>(thread_budget(), count));
  if (threads <= 1) {
    for (std::int64_t i = begin; i < end; ++i) f(i);
    return;
  }
  std::atomic<std::int64_t> next{begin};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::int64_t i = next.fetch_add(1);
        if (i >= end || failed.load()) break;
        try {
          f(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nocollide
