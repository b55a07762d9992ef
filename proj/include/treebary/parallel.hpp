#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace treebary {

// Width of the data-parallel loops; 0 restores the OpenMP default.
void set_thread_count(int threads);
int thread_count();

// Runs body(i) for i in [0, n) on the OpenMP team. The first exception
// thrown by any iteration is rethrown on the calling thread once the
// loop has finished.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) {
        error = std::current_exception();
      }
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace treebary
