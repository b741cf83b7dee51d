#include "dagsmooth/parallel.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dagsmooth {

namespace {
std::atomic<int> g_thread_cap{0};
}

void set_thread_cap(int cap) { g_thread_cap.store(cap < 0 ? 0 : cap); }

bool openmp_enabled() noexcept {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  if (const char* env = std::getenv("DAGSMOOTH_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  int cap = g_thread_cap.load();
  if (cap >= 1 && cap < n) n = cap;
  return n < 1 ? 1 : n;
}

}  // namespace dagsmooth
