#include <benchmark/benchmark.h>

#include "hsdm/datagen.hpp"
#include "hsdm/filters.hpp"
#include "hsdm/linalg.hpp"

namespace {

using namespace hsdm;

SymMat random_spd(std::size_t dim, Rng& rng) {
  Mat a(dim, dim + 4);
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = iid_stream(dim, rng);
  return SymMat(Mat(a * a.transpose() / static_cast<double>(dim + 4)));
}

void BM_CholSolve(benchmark::State& state) {
  Rng rng(1);
  const auto dim = static_cast<std::size_t>(state.range(0));
  const SymMat a = random_spd(dim, rng);
  const Vec b = iid_stream(dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(chol_solve(a, b));
}
BENCHMARK(BM_CholSolve)->Arg(20)->Arg(50)->Arg(100)->Arg(200);

void BM_EigSym(benchmark::State& state) {
  Rng rng(2);
  const SymMat a = random_spd(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym(a));
}
BENCHMARK(BM_EigSym)->Arg(20)->Arg(50)->Arg(100);

void BM_PowerIteration(benchmark::State& state) {
  Rng rng(3);
  const auto dim = static_cast<std::size_t>(state.range(0));
  const SymMat a = random_spd(dim, rng);
  Vec p = Vec::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (auto _ : state) {
    PowerEstimate e = power_iter_estimate(a, p, 0.05);
    p = std::move(e.p);
    benchmark::DoNotOptimize(e.varpi);
  }
}
BENCHMARK(BM_PowerIteration)->Arg(50)->Arg(100);

/// One observe() per iteration on a pre-generated stream, including the
/// O(D^2) moment update.
template <typename MakeFilter>
void run_filter(benchmark::State& state, MakeFilter make) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Scenario sc;
  sc.dim = dim;
  sc.sparsity_pct = 100.0 / static_cast<double>(dim);
  sc.snr_db = 20;
  ScenarioStream data(sc, 0);
  std::vector<Sample> samples;
  for (int i = 0; i < 256; ++i) samples.push_back(data.next());
  std::unique_ptr<OnlineFilter> f = make(dim);
  std::size_t i = 0;
  for (auto _ : state) {
    const Sample& s = samples[i++ % samples.size()];
    f->observe(s.a, s.b);
  }
  state.SetItemsProcessed(state.iterations());
}

const SolverParams kParams = SolverParams::from_fraction(0.5, 0.99, 0.1);

void BM_HrlsaStep(benchmark::State& state) {
  run_filter(state, [](std::size_t d) { return std::make_unique<HrlsaFilter>(d, kParams, VarpiPolicy{}); });
}
BENCHMARK(BM_HrlsaStep)->Arg(50)->Arg(100)->Arg(200);

void BM_HrlsbStep(benchmark::State& state) {
  run_filter(state, [](std::size_t d) { return std::make_unique<HrlsbFilter>(d, kParams); });
}
BENCHMARK(BM_HrlsbStep)->Arg(50)->Arg(100)->Arg(200);

void BM_CreglsStep(benchmark::State& state) {
  run_filter(state, [](std::size_t d) { return std::make_unique<CreglsFilter>(d, kParams, 1e-3); });
}
BENCHMARK(BM_CreglsStep)->Arg(50)->Arg(100)->Arg(200);

void BM_RlsStep(benchmark::State& state) {
  run_filter(state, [](std::size_t d) { return std::make_unique<RlsFilter>(d); });
}
BENCHMARK(BM_RlsStep)->Arg(50)->Arg(100)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
