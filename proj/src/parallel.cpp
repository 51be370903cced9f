#include "vexrec/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vexrec {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_max_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

std::optional<int> apply_thread_cap_from_env() {
  const char* raw = std::getenv("VEXREC_THREADS");
  if (raw == nullptr) return std::nullopt;
  int n = 0;
  const char* end = raw + std::strlen(raw);
  auto [ptr, ec] = std::from_chars(raw, end, n);
  if (ec != std::errc() || ptr != end || n <= 0) return std::nullopt;
  if (n < max_threads()) set_max_threads(n);
  return n;
}

}  // namespace vexrec
