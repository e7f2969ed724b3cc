// Inner loops with two builds each: a plain serial reference and an OpenMP
// version. Both produce bit-identical results (every output element is
// accumulated in the same order); tests compare them and bench/ times them.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stormqueue/core.hpp"

namespace stormqueue {

/// Time-varying causal convolution:
///   out[i] = sum_{j <= i} kernels[kernel_of_source[j]][i - j] * x[j].
/// Each kernel must hold at least x.size() lags. Zero inputs are skipped.
struct CausalConvolution {
  std::span<const double> x;
  std::span<const std::size_t> kernel_of_source;
  const std::vector<std::vector<double>>* kernels = nullptr;
};

/// Mixture E-step over samples given log-durations.
/// `resp` is component-major (resp[c * n + i]); `sample_loglik[i]` receives
/// log sum_c rho_c f_c(d_i).
struct EStepInput {
  std::span<const double> log_durations;
  std::span<const WeibullComponent> components;
};

namespace serial {

void causal_convolve(const CausalConvolution& conv, std::span<double> out);
void e_step(const EStepInput& in, std::span<double> resp, std::span<double> sample_loglik);

/// Evaluates f(p) for every probe in order.
template <typename Probe, typename F>
std::vector<double> scan(std::span<const Probe> probes, F&& f) {
  std::vector<double> out(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) out[p] = f(probes[p]);
  return out;
}

}  // namespace serial

namespace parallel {

void causal_convolve(const CausalConvolution& conv, std::span<double> out);
void e_step(const EStepInput& in, std::span<double> resp, std::span<double> sample_loglik);

template <typename Probe, typename F>
std::vector<double> scan(std::span<const Probe> probes, F&& f) {
  std::vector<double> out(probes.size());
  const auto n = static_cast<long long>(probes.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long long p = 0; p < n; ++p) out[static_cast<std::size_t>(p)] = f(probes[p]);
  return out;
}

}  // namespace parallel

/// Number of OpenMP threads available (1 without OpenMP).
int kernel_threads();

}  // namespace stormqueue
