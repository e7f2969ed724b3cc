#include "kernels_detail.hpp"

namespace stormqueue::serial {

void causal_convolve(const CausalConvolution& conv, std::span<double> out) {
  for (std::size_t i = 0; i < conv.x.size(); ++i) out[i] = detail::convolve_at(conv, i);
}

void e_step(const EStepInput& in, std::span<double> resp, std::span<double> sample_loglik) {
  for (std::size_t i = 0; i < in.log_durations.size(); ++i) {
    detail::e_step_at(in, i, resp, sample_loglik);
  }
}

}  // namespace stormqueue::serial
