#include "lrsetd/linalg.hpp"
#include "lrsetd/masks.hpp"
#include "lrsetd/solver.hpp"
#include "lrsetd/tensor.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace lrsetd;

DenseTensor noise(const Dims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseTensor t(dims);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = g(rng);
  return t;
}

Dims cube(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return {n, n, n};
}

void BM_Unfold(benchmark::State& state) {
  const DenseTensor t = noise(cube(state), 1);
  const auto mode = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(unfold(t, mode));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_Unfold)->ArgsProduct({{32, 64}, {0, 1, 2}});

void BM_ModeProduct(benchmark::State& state) {
  const DenseTensor t = noise(cube(state), 2);
  const DenseMatrix m = DenseMatrix::Random(8, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mode_product(t, m, 1));
}
BENCHMARK(BM_ModeProduct)->Arg(32)->Arg(64);

void BM_SvdShrink(benchmark::State& state) {
  const DenseMatrix m = DenseMatrix::Random(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(svd_shrink(m, 0.5));
}
BENCHMARK(BM_SvdShrink)->Arg(64)->Arg(256);

// Shared setup for the ADMM block benchmarks: 60% random mask, traffic preset.
struct Problem {
  DenseTensor observed;
  ObservationMask mask;
  SolverConfig cfg;
};

Problem make_problem(std::size_t n) {
  DenseTensor truth = noise({n, n, n}, 3);
  ObservationMask mask = random_mask(truth.dims(), 0.6, 3);
  SolverConfig cfg = preset_config("traffic-wholeday");
  cfg.ranks = {5, 5, 5};
  return {project(truth, mask), std::move(mask), cfg};
}

void BM_UpdateFactors(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  SolverState s = init_state(p.observed, p.mask, p.cfg);
  for (auto _ : state) update_factors(s, p.cfg);
}
BENCHMARK(BM_UpdateFactors)->Arg(24)->Arg(48);

void BM_SolverIteration(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)));
  SolverState s = init_state(p.observed, p.mask, p.cfg);
  for (auto _ : state) {
    update_factors(s, p.cfg);
    update_y(s, p.cfg);
    update_core(s, p.cfg);
    update_z(s, p.cfg, p.observed, p.mask);
    update_w(s, p.cfg);
    update_duals(s, p.cfg);
  }
}
BENCHMARK(BM_SolverIteration)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
