#include <benchmark/benchmark.h>

#include "rwre/models.hpp"
#include "rwre/estimators.hpp"
#include "rwre/lil.hpp"
#include "rwre/resolvent.hpp"
#include "rwre/walk.hpp"

namespace {

void BM_StepSrw1d(benchmark::State& state) {
  rwre::EnvironmentView env(rwre::srw_spec(1));
  const size_t n = static_cast<size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    long long sink = 0;
    rwre::walk_quenched(env, n, seed++, [&](size_t, std::span<const rwre::Coord> pos) {
      sink ^= pos[0];
    });
    benchmark::DoNotOptimize(sink);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(n));
}
BENCHMARK(BM_StepSrw1d)->Arg(1 << 16);

void BM_StepPeriodic(benchmark::State& state) {
  rwre::EnvironmentView env(rwre::period2_spec());
  const size_t n = static_cast<size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    long long sink = 0;
    rwre::walk_quenched(env, n, seed++, [&](size_t, std::span<const rwre::Coord> pos) {
      sink ^= pos[0];
    });
    benchmark::DoNotOptimize(sink);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(n));
}
BENCHMARK(BM_StepPeriodic)->Arg(1 << 16);

void BM_StepDirichlet(benchmark::State& state) {
  rwre::EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = rwre::ModelKind::IidDirichlet;
  spec.offsets_flat = {1, -1};
  spec.alpha = {1.0, 1.0};
  spec.seed = 99;
  spec.validate();
  rwre::EnvironmentView env(spec);
  const size_t n = static_cast<size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    long long sink = 0;
    rwre::walk_quenched(env, n, seed++, [&](size_t, std::span<const rwre::Coord> pos) {
      sink ^= pos[0];
    });
    benchmark::DoNotOptimize(sink);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(n));
}
BENCHMARK(BM_StepDirichlet)->Arg(1 << 12);

void BM_ResolventSolve(benchmark::State& state) {
  // periodic chain with state.range(0) phases
  const int phases = static_cast<int>(state.range(0));
  rwre::EnvironmentSpec spec;
  spec.dim = 1;
  spec.range = 1;
  spec.model = rwre::ModelKind::Periodic;
  spec.period = {phases};
  for (int p = 0; p < phases; ++p) {
    const double a = 0.3 + 0.4 * static_cast<double>(p) / phases;
    spec.kernels.push_back(rwre::JumpKernel::make(1, {{1}, {-1}}, {a, 1.0 - a}));
  }
  spec.validate();
  rwre::PhaseChain chain = rwre::build_phase_chain(spec);
  const std::vector<double> g = rwre::centered_drift(chain);
  for (auto _ : state) {
    auto sol = rwre::solve_limit(chain, g, 1);
    benchmark::DoNotOptimize(sol.residual);
  }
}
BENCHMARK(BM_ResolventSolve)->Arg(4)->Arg(16)->Arg(64);

void BM_BuildXi(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  rwre::EnvironmentView env(rwre::srw_spec(1));
  rwre::Trajectory traj = rwre::simulate_quenched(env, n, 7);
  rwre::CovarianceTrack track = rwre::conditional_covariance(traj, env);
  const std::vector<double> v = {0.0};
  for (auto _ : state) {
    auto xi = rwre::build_xi(traj, v, track);
    benchmark::DoNotOptimize(xi.normalizer);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(n));
}
BENCHMARK(BM_BuildXi)->Arg(1 << 16);

void BM_SupDistance(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  rwre::EnvironmentView env(rwre::srw_spec(1));
  rwre::Trajectory traj = rwre::simulate_quenched(env, n, 7);
  rwre::CovarianceTrack track = rwre::conditional_covariance(traj, env);
  const std::vector<double> v = {0.0};
  rwre::RescaledPath xi = rwre::build_xi(traj, v, track);
  rwre::PiecewisePath probe = rwre::line_probe(1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rwre::sup_distance(xi.path, probe));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(n));
}
BENCHMARK(BM_SupDistance)->Arg(1 << 16);

void BM_QuenchedMeanDense(benchmark::State& state) {
  rwre::EnvironmentView env(rwre::period2_spec());
  const size_t n = static_cast<size_t>(state.range(0));
  for (auto _ : state) {
    auto qm = rwre::quenched_mean(env, n);
    benchmark::DoNotOptimize(qm.means.back());
  }
}
BENCHMARK(BM_QuenchedMeanDense)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
