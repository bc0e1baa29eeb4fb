#include "gyrodiff/parallel.hpp"

#include <atomic>

namespace gyrodiff {

namespace {
std::atomic<int> g_workers{1};
}

int default_workers() { return g_workers.load(); }
void set_default_workers(int n) { g_workers.store(std::max(1, n)); }

bool& in_parallel_region() {
  thread_local bool flag = false;
  return flag;
}

}  // namespace gyrodiff
