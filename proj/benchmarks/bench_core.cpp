#include <benchmark/benchmark.h>

#include <random>

#include "pentapulse/atom_dynamics.hpp"
#include "pentapulse/eigenstructure.hpp"
#include "pentapulse/medium_propagation.hpp"

using namespace pentapulse;

static void BM_AnalyticEigenvalues(benchmark::State& state) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> om(0.0, 50.0);
  const Rabi4 r{om(g), om(g), om(g), om(g)};
  for (auto _ : state) benchmark::DoNotOptimize(eigenvalues_general(r, 20.0));
}
BENCHMARK(BM_AnalyticEigenvalues);

static void BM_NumericEigensolve(benchmark::State& state) {
  const Mat5 h = build_hamiltonian(Detuning4{20.0, 0.0, 20.0, 0.0}, Rabi4{12.0, 30.0, 7.0, 12.0});
  for (auto _ : state) benchmark::DoNotOptimize(numeric_eigensolve(h));
}
BENCHMARK(BM_NumericEigensolve);

static void BM_StirapTransfer(benchmark::State& state) {
  const PulseSet p = default_transfer_pulses(20.0);
  const Grid g = transfer_grid(p, -10.0, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(stirap_experiment(p, g).fidelity);
  state.counters["n_tau"] = static_cast<double>(g.n_tau);
}
BENCHMARK(BM_StirapTransfer)->Unit(benchmark::kMillisecond);

static void BM_SliceSolve(benchmark::State& state) {
  const PulseSet p = adiabaton_pulses();
  const Grid g{-10.0, 10.0, 2001};
  const auto tau = g.taus();
  SliceFields f;
  for (int i = 0; i < kTransitions; ++i) {
    f[i].resize(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k) f[i][k] = p.envelopes[i](tau[k]);
  }
  const Vec5 b0 = AtomState::bare(1).b;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_slice(p.multiphoton(), f, tau, b0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_SliceSolve)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
