#include <benchmark/benchmark.h>

#include <random>

#include "cbounds/bounds.hpp"
#include "cbounds/coupling_metrics.hpp"
#include "cbounds/finite_engine.hpp"
#include "cbounds/lattice_kernels.hpp"
#include "cbounds/simulators.hpp"
#include "cbounds/transport.hpp"

using namespace cbounds;

namespace {

Matrix random_rates(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix q = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    q(i, (i + 1) % n) = 0.1 + u(gen);
    for (int j = 0; j < n; ++j)
      if (j != i && u(gen) < 0.5) q(i, j) += u(gen);
    q(i, i) = -q.row(i).sum();
  }
  return q;
}

Vector random_mass(int n, std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  Vector p(n);
  for (int i = 0; i < n; ++i) p(i) = e(gen);
  return p / p.sum();
}

void BM_Transport(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix pts(n, 2);
  for (int i = 0; i < n; ++i) pts.row(i) << u(gen), u(gen);
  Matrix d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
  const FiniteMetric rho(d, MetricMode::Metric);
  const ProbVector mu(random_mass(n, gen));
  const ProbVector nu(random_mass(n, gen));
  for (auto _ : state) benchmark::DoNotOptimize(solve_transport(mu, nu, rho).plan.cost);
}
BENCHMARK(BM_Transport)->Arg(4)->Arg(16)->Arg(64);

void BM_SemigroupApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto q = validate_generator(random_rates(n, 11));
  const Vector f = Vector::LinSpaced(n, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(semigroup_apply(q, 2.0, f));
}
BENCHMARK(BM_SemigroupApply)->Arg(8)->Arg(64);

void BM_ExpBound(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto q = validate_generator(random_rates(n, 13));
  const auto obs = ObservableSpec::finite(Vector::LinSpaced(n, -1.0, 1.0), 2.0);
  const auto mu = ProbVector::uniform(static_cast<std::size_t>(n));
  for (auto _ : state) benchmark::DoNotOptimize(exp_bound(q, obs, mu, mu).upper);
}
BENCHMARK(BM_ExpBound)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_CouplingTime(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto q = validate_generator(random_rates(n, 17));
  const auto rho = FiniteMetric::discrete(static_cast<std::size_t>(n));
  for (auto _ : state) benchmark::DoNotOptimize(coupling_time_h(q, rho).h(0, 1));
}
BENCHMARK(BM_CouplingTime)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_RwKernel(benchmark::State& state) {
  const double s = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rw_kernel_1d(s, 3));
}
BENCHMARK(BM_RwKernel)->Arg(10)->Arg(1000)->Arg(100000);

void BM_Sep1d(benchmark::State& state) {
  const long L = state.range(0);
  SepConfig base;
  base.d = 1;
  base.L = L;
  base.edge_rate = SepConfig::default_edge_rate(1);
  base.functional = OccupationSet{{{0}}};
  std::uint64_t replica = 0;
  std::uint64_t events = 0;
  for (auto _ : state) {
    RngStream rng(RngStreamSpec{3, replica++, "bench/sep"});
    SepConfig config = base;
    config.initial = bernoulli_configuration(config.volume(), 0.5, rng);
    const SepSiteRun r = simulate_sep_sites(config, {64.0}, 8, rng);
    events += r.events;
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Sep1d)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
