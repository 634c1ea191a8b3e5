#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace semilabel {

// Static-schedule OpenMP loop over [0, n). The first exception thrown by
// `body` is rethrown on the calling thread after the loop completes.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : 1) if (threads > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace semilabel
