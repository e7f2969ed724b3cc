// Per-element bodies shared by the serial and OpenMP kernels so both builds
// run the exact same floating-point sequence.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "stormqueue/kernels.hpp"

namespace stormqueue::detail {

inline double convolve_at(const CausalConvolution& conv, std::size_t i) {
  const auto& kernels = *conv.kernels;
  double acc = 0.0;
  for (std::size_t j = 0; j <= i; ++j) {
    const double xj = conv.x[j];
    if (xj == 0.0) continue;
    acc += kernels[conv.kernel_of_source[j]][i - j] * xj;
  }
  return acc;
}

inline void e_step_at(const EStepInput& in, std::size_t i, std::span<double> resp,
                      std::span<double> sample_loglik) {
  const std::size_t n = in.log_durations.size();
  const std::size_t l = in.components.size();
  const double ld = in.log_durations[i];
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < l; ++c) {
    const auto& comp = in.components[c];
    const double log_z = ld - std::log(comp.scale);
    const double lp = std::log(comp.weight) + std::log(comp.shape / comp.scale) +
                      (comp.shape - 1.0) * log_z - std::exp(comp.shape * log_z);
    resp[c * n + i] = lp;
    best = std::max(best, lp);
  }
  if (!std::isfinite(best)) {
    for (std::size_t c = 0; c < l; ++c) resp[c * n + i] = 1.0 / static_cast<double>(l);
    sample_loglik[i] = best;
    return;
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < l; ++c) {
    const double e = std::exp(resp[c * n + i] - best);
    resp[c * n + i] = e;
    sum += e;
  }
  for (std::size_t c = 0; c < l; ++c) resp[c * n + i] /= sum;
  sample_loglik[i] = best + std::log(sum);
}

}  // namespace stormqueue::detail
