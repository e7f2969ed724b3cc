#include "kernels_detail.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stormqueue {

namespace parallel {

void causal_convolve(const CausalConvolution& conv, std::span<double> out) {
  const auto n = static_cast<long long>(conv.x.size());
  // Row i costs O(i): dynamic schedule balances the triangle.
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = detail::convolve_at(conv, static_cast<std::size_t>(i));
  }
}

void e_step(const EStepInput& in, std::span<double> resp, std::span<double> sample_loglik) {
  const auto n = static_cast<long long>(in.log_durations.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    detail::e_step_at(in, static_cast<std::size_t>(i), resp, sample_loglik);
  }
}

}  // namespace parallel

int kernel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace stormqueue
