#include <benchmark/benchmark.h>

#include <random>

#include "chb6/control.hpp"
#include "chb6/sensitivity.hpp"
#include "chb6/synthetic.hpp"

namespace {

chb6::GridPtr square(int n) {
  chb6::GridSpec s;
  s.dim = 2;
  s.sizes = {n, n, 1};
  s.lengths = {6.283185307179586, 6.283185307179586, 1.0};
  return chb6::Grid::make(s);
}

chb6::PhysParams params() {
  chb6::PhysParams p;
  p.lambda = chb6::SmoothDrag{1.0, 3.0};
  p.nu = 0.5;
  p.sigma = 0.1;
  p.h = chb6::TanhSource{0.05};
  return p;
}

void BM_RoundTrip(benchmark::State& state) {
  const auto grid = square(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  const chb6::Field f = chb6::random_smooth_field(grid, rng, 1.0);
  for (auto _ : state) {
    const auto s = f.spectrum();
    benchmark::DoNotOptimize(chb6::Field::from_spectrum(grid, s));
  }
}
BENCHMARK(BM_RoundTrip)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void BM_Forward(benchmark::State& state) {
  const auto grid = square(static_cast<int>(state.range(0)));
  chb6::TimeGrid time;
  time.T = 0.1;
  time.n_steps = 10;
  std::mt19937_64 rng(2);
  const chb6::Field phi0 = chb6::random_smooth_field(grid, rng, 0.5);
  const chb6::Control g = chb6::random_control(grid, time, rng, 0.5);
  const auto p = params();
  for (auto _ : state) benchmark::DoNotOptimize(chb6::solve_state(g, phi0, p));
  state.SetItemsProcessed(state.iterations() * time.n_steps);
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Adjoint(benchmark::State& state) {
  const auto grid = square(static_cast<int>(state.range(0)));
  chb6::TimeGrid time;
  time.T = 0.1;
  time.n_steps = 10;
  std::mt19937_64 rng(3);
  const chb6::Field phi0 = chb6::random_smooth_field(grid, rng, 0.5);
  const chb6::Control g = chb6::random_control(grid, time, rng, 0.5);
  const auto traj = chb6::solve_state(g, phi0, params());
  chb6::Targets targets = chb6::Targets::zero(grid, time);
  targets.phi_T = chb6::Field(grid, 0.1);
  chb6::ControlParams cp;
  cp.beta = {1.0, 1.0, 1.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(chb6::solve_adjoint(traj, targets, cp));
  state.SetItemsProcessed(state.iterations() * time.n_steps);
}
BENCHMARK(BM_Adjoint)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
