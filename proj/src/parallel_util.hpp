#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace stormqueue::detail {

/// Runs body(i) for i in [0, n) across OpenMP threads; rethrows the exception
/// from the lowest failing index once the loop finishes.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr error;
  std::size_t error_index = n;
  std::mutex mu;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(mu);
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace stormqueue::detail
