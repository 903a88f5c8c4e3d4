#include "distdyn/parallel.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace distdyn {

int max_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_workers(int n) {
  n = std::max(1, n);
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int current_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace distdyn
