// Micro benchmarks for the hot paths: one simulator run per scenario, the
// median solver, Laplacian spectra and the per-agent gain design.

#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "resest/graph.hpp"
#include "resest/median.hpp"
#include "resest/observability.hpp"
#include "resest/scenario_io.hpp"
#include "resest/sim.hpp"

using namespace resest;

namespace {

Scenario fixture(const std::string& name) { return load_scenario(std::string(RESEST_SCENARIO_DIR) + "/" + name); }

// Simulated seconds per iteration are fixed so items/s reads as RK4 steps/s.
void run_fixture(benchmark::State& state, const std::string& name, double horizon) {
  Scenario s = fixture(name);
  s.sim.horizon = horizon;
  s.events.clear();
  s.sim.decimation = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(horizon / s.sim.dt));
}

void BM_SimulateThreeInertia(benchmark::State& state) { run_fixture(state, "threeinertia.json", 2.0); }
void BM_SimulateRotation(benchmark::State& state) { run_fixture(state, "rotation_join_leave.json", 2.0); }
void BM_SimulateScalarLyapunov(benchmark::State& state) { run_fixture(state, "scalar_lyapunov.json", 2.0); }

void BM_MedianSolver(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-10, 10);
  MedianProblem p;
  p.topology = Topology::ring(N);
  p.gamma = 5.0;
  for (std::size_t i = 0; i < N; ++i) {
    p.values.push_back(val(rng));
    p.indicators.push_back(1);
  }
  MedianRunOptions opt;
  opt.horizon = 1.0;
  opt.record_every = 1000;
  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(N));
  for (auto _ : state) benchmark::DoNotOptimize(run_median_solver(p, x0, opt));
  state.SetItemsProcessed(state.iterations() * 1000);
}

void BM_AlgebraicConnectivity(benchmark::State& state) {
  const Matrix L = laplacian(Topology::ring(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(algebraic_connectivity(L));
}

void BM_ObserverBank(benchmark::State& state) {
  const PlantModel p = three_inertia_plant();
  const SharedBasis b = construct_shared_basis(p);
  for (auto _ : state) benchmark::DoNotOptimize(build_observer_bank(p, b, -1.0));
}

void BM_SharedBasis(benchmark::State& state) {
  const PlantModel p = three_inertia_plant();
  for (auto _ : state) benchmark::DoNotOptimize(construct_shared_basis(p));
}

}  // namespace

BENCHMARK(BM_SimulateThreeInertia)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateRotation)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateScalarLyapunov)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MedianSolver)->Arg(5)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AlgebraicConnectivity)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK(BM_ObserverBank)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SharedBasis)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
