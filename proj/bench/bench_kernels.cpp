// OpenMP kernels against the serial reference on the workloads the
// pipelines actually run. Compare e.g. BM_Calderon<Omp> with BM_Calderon<Serial>.

#include "aniframe/calderon.hpp"
#include "aniframe/frame_ops.hpp"
#include "aniframe/kernels.hpp"

#include <benchmark/benchmark.h>

using namespace aniframe;

namespace {

struct Omp {
  static constexpr auto calderon = &kernels::omp::calderon_values;
  static constexpr auto columns = &kernels::omp::sample_columns;
  static constexpr auto gram = &kernels::omp::gram_direct;
  static constexpr auto abs_sum = &kernels::omp::weighted_abs_sum;
  static constexpr auto segments = &kernels::omp::weighted_abs_segments;
};

struct Serial {
  static constexpr auto calderon = &kernels::serial::calderon_values;
  static constexpr auto columns = &kernels::serial::sample_columns;
  static constexpr auto gram = &kernels::serial::gram_direct;
  static constexpr auto abs_sum = &kernels::serial::weighted_abs_sum;
  static constexpr auto segments = &kernels::serial::weighted_abs_segments;
};

DilationInfo dilation() {
  Mat a(2, 2);
  a << 2, 1, 0, 4;
  return validate_dilation(a);
}

std::vector<Generator> elements(const DilationInfo& d, long k_radius) {
  return window_elements(mexican_hat_2d(), d, make_window(2, 0, 1, k_radius));
}

// Calderon sums over the default 128 x 64 shell grid, |j| <= 12.
template <class K>
void BM_Calderon(benchmark::State& state) {
  const DilationInfo d = dilation();
  const auto pts = shell_grid(d, {128, 64});
  std::vector<Mat> T;
  for (int j = -12; j <= 12; ++j) T.push_back(d.transpose().power(-j));
  const Generator g = mexican_hat_2d();
  for (auto _ : state) benchmark::DoNotOptimize(K::calderon(g, T, pts, 1.0));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size() * T.size()));
}

// Synthesis matrix of an 18-element window on a 129 x 129 grid.
template <class K>
void BM_SampleColumns(benchmark::State& state) {
  const DilationInfo d = dilation();
  const auto cols = elements(d, 1);
  const GridSpec grid = spaced_grid(2, -8.0, 8.0, 0.125);
  const MultiIndex beta = state.range(0) ? MultiIndex{1, 0} : MultiIndex{};
  for (auto _ : state) benchmark::DoNotOptimize(K::columns(cols, grid, beta, 0.125));
  state.SetItemsProcessed(state.iterations() * grid.size() * static_cast<long>(cols.size()));
}

// Per-entry adaptive quadrature Gram block.
template <class K>
void BM_GramDirect(benchmark::State& state) {
  const DilationInfo d = dilation();
  const auto all = elements(d, 1);
  const std::vector<Generator> cols(all.begin(), all.begin() + 6);
  for (auto _ : state) benchmark::DoNotOptimize(K::gram(cols, cols, InnerProductMethod::Fourier, 1e-8));
}

// Molecular-norm reductions on a 513 x 513 grid.
template <class K>
void BM_WeightedAbs(benchmark::State& state) {
  const long run = 513, n = run * run;
  CVector v(n);
  std::vector<double> w(n);
  for (long i = 0; i < n; ++i) {
    v[i] = cplx(std::sin(0.001 * i), std::cos(0.003 * i));
    w[i] = 1.0 + 1e-6 * i;
  }
  for (auto _ : state) {
    if (state.range(0))
      benchmark::DoNotOptimize(K::segments(v, w, run));
    else
      benchmark::DoNotOptimize(K::abs_sum(v, w));
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Calderon, Omp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_Calderon, Serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_SampleColumns, Omp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_SampleColumns, Serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_GramDirect, Omp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_GramDirect, Serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_WeightedAbs, Omp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_TEMPLATE(BM_WeightedAbs, Serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
