// Serial reference against the OpenMP kernels on the same inputs.
#include <benchmark/benchmark.h>

#include <random>

#include "qspec/criteria.hpp"
#include "qspec/inequality_lab.hpp"
#include "qspec/potential_spec.hpp"
#include "qspec/spectral.hpp"

using namespace qspec;

namespace {

Execution policy(const benchmark::State& st) {
  return st.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& st) { st.SetLabel(st.range(0) == 0 ? "serial" : "parallel"); }

// Many atoms and density cells so the window sweep dominates.
BVPotential dense_potential() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(-3.0, 3.0);
  std::vector<double> knots;
  std::vector<double> density;
  for (int i = 0; i <= 4000; ++i) knots.push_back(-100.0 + 0.05 * i);
  for (int i = 0; i < 4000; ++i) density.push_back(w(rng));
  std::vector<Atom> atoms;
  for (int i = 0; i < 4000; ++i) atoms.push_back({-100.0 + 0.05 * i + 0.025, w(rng)});
  return BVPotential(std::move(knots), std::move(density), std::move(atoms));
}

void BM_brinck(benchmark::State& st) {
  static const BVPotential p = dense_potential();
  for (auto _ : st) benchmark::DoNotOptimize(brinck_constant(p, 1.0, policy(st)));
  label(st);
}
BENCHMARK(BM_brinck)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_molchanov(benchmark::State& st) {
  static const BVPotential p = dense_potential();
  for (auto _ : st) benchmark::DoNotOptimize(molchanov_profile(p, 1.0, 20001, policy(st)));
  label(st);
}
BENCHMARK(BM_molchanov)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_suite(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(run_suite("lemma3", 42, 1000, policy(st)));
  label(st);
}
BENCHMARK(BM_suite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_spectrum(benchmark::State& st) {
  static const BVPotential p = make_paper_comb(0, 30, 1.0, AlphaRule::constant);
  ScanConfig cfg;
  cfg.truncation = Truncation::half_line;
  cfg.L_list = {10, 20, 30};
  for (auto _ : st) benchmark::DoNotOptimize(spectrum_scan(p, cfg, policy(st)));
  label(st);
}
BENCHMARK(BM_spectrum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
