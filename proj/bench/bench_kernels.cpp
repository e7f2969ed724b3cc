// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to vary the
// parallel side; the serial side ignores it.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "stormqueue/aggregated.hpp"
#include "stormqueue/kernels.hpp"
#include "stormqueue/reconstruct.hpp"

using namespace stormqueue;

namespace {

struct ConvolutionData {
  std::vector<double> x;
  std::vector<std::size_t> which;
  std::vector<std::vector<double>> kernels;

  explicit ConvolutionData(std::size_t n) : x(n), which(n) {
    const WeibullMixture mixes[] = {WeibullMixture({{1.0, 0.71, 0.486}, {10.5, 14.4, 0.257}, {10.7, 211.8, 0.257}}),
                                    WeibullMixture({{5.3, 11.0, 0.323}, {12.4, 112.2, 0.677}})};
    for (const auto& m : mixes) kernels.push_back(lag_kernel(m, 0.25, n, ConvolutionRule::cell_mass));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (static_cast<double>(i) * 0.25 - 20.0) / 5.0;
      x[i] = 30.0 * std::exp(-0.5 * z * z) + 0.1;
      which[i] = i < n / 3 ? 0 : 1;
    }
  }
};

template <void (*Convolve)(const CausalConvolution&, std::span<double>)>
void BM_Convolve(benchmark::State& state) {
  const ConvolutionData d(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(d.x.size());
  const CausalConvolution conv{d.x, d.which, &d.kernels};
  for (auto _ : state) {
    Convolve(conv, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0) / 2);
}

template <void (*EStep)(const EStepInput&, std::span<double>, std::span<double>)>
void BM_EStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> dist(2.0, 1.2);
  std::vector<double> ld(n);
  for (auto& v : ld) v = std::log(dist(rng));
  const std::vector<WeibullComponent> comps{{1.0, 0.71, 0.486}, {10.5, 14.4, 0.257}, {10.7, 211.8, 0.257}};
  std::vector<double> resp(3 * n), ll(n);
  for (auto _ : state) {
    EStep({ld, comps}, resp, ll);
    benchmark::DoNotOptimize(resp.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_LsScan(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> fl(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (static_cast<double>(i) * 0.25 - 30.0) / 8.0;
    fl[i] = 50.0 * std::exp(-0.5 * z * z);
  }
  const auto rl = convolve_stationary(fl, 0.25, 1.3094, 54.1684);
  std::vector<std::pair<double, double>> probes;
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) probes.emplace_back(0.3 * std::pow(1.8, a), 2.0 * std::pow(2.0, b));
  }
  const std::span<const std::pair<double, double>> p(probes);
  auto f = [&](const std::pair<double, double>& q) { return ls_objective(fl, rl, 0.25, q.first, q.second); };
  for (auto _ : state) {
    auto out = Parallel ? parallel::scan(p, f) : serial::scan(p, f);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(probes.size()));
}

}  // namespace

BENCHMARK(BM_Convolve<serial::causal_convolve>)->Name("convolve/serial")->Arg(1000)->Arg(4000);
BENCHMARK(BM_Convolve<parallel::causal_convolve>)->Name("convolve/parallel")->Arg(1000)->Arg(4000)->UseRealTime();
BENCHMARK(BM_EStep<serial::e_step>)->Name("e_step/serial")->Arg(5000)->Arg(100000);
BENCHMARK(BM_EStep<parallel::e_step>)->Name("e_step/parallel")->Arg(5000)->Arg(100000)->UseRealTime();
BENCHMARK(BM_LsScan<false>)->Name("ls_scan/serial")->Arg(500);
BENCHMARK(BM_LsScan<true>)->Name("ls_scan/parallel")->Arg(500)->UseRealTime();

BENCHMARK_MAIN();
