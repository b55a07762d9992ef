#include "treebary/parallel.hpp"

#include <omp.h>

namespace treebary {

namespace {
int default_threads = 0;
}

void set_thread_count(int threads) {
  if (default_threads == 0) {
    default_threads = omp_get_max_threads();
  }
  omp_set_num_threads(threads > 0 ? threads : default_threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace treebary
