#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "cbounds/lattice_kernels.hpp"
#include "cbounds/mc_harness.hpp"
#include "cbounds/parallel.hpp"
#include "cbounds/simulators.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

using namespace cbounds;

namespace {

DiffusionSpec ou(double c, double dt, double T) {
  DiffusionSpec s;
  s.drift_neg_gradient = [c](double x) { return -c * x; };
  s.c = c;
  s.dt = dt;
  s.horizon = T;
  return s;
}

SepConfig sep1d(long L, std::vector<std::uint8_t> eta, std::vector<std::vector<long>> set) {
  SepConfig c;
  c.d = 1;
  c.L = L;
  c.edge_rate = SepConfig::default_edge_rate(1);
  c.initial = std::move(eta);
  c.functional = OccupationSet{std::move(set)};
  return c;
}

// Var int_0^T eta_t(0) dt under product Bernoulli(1/2): (1/2) int_0^T (T - u) p_u(0, 0) du.
double sep_variance_oracle(int d, double T) {
  return 0.5 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                   [&](double u) { return (T - u) * std::pow(oracle::rw_kernel_1d_bessel(u / d, 0), d); }, 0.0, T,
                   15, 1e-12);
}

}  // namespace

TEST_CASE("diffusion spec validation") {
  auto s = ou(1.0, 0.5, 1.0);
  expect_error([&] { s.validate(); }, ErrorCode::StepTooLarge);
  s = ou(-1.0, 0.01, 1.0);
  expect_error([&] { s.validate(); }, ErrorCode::NonPositiveParameter);
}

TEST_CASE("synchronous coupling") {
  RngStream rng({1, 0, "diff"});
  const auto same = simulate_diffusion_coupled(ou(1.0, 0.01, 5.0), 0.3, 0.3, rng);
  CHECK(same.x == same.y);

  const double c = 2.0, dt = 0.01;
  const auto p = simulate_diffusion_coupled(ou(c, dt, 3.0), -1.0, 2.0, rng, 10);
  CHECK(p.times.front() == 0.0);
  CHECK(p.times.back() == doctest::Approx(3.0));
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    const double gap = p.y[i] - p.x[i];
    const double steps = std::round(p.times[i] / dt);
    CHECK(std::abs(gap - 3.0 * std::pow(1 - c * dt, steps)) < 1e-12);
    CHECK(gap <= 3.0 * std::exp(-c * p.times[i]) * (1 + 10 * c * dt));
  }
  CHECK(p.max_gap_ratio <= 1.0 + 1e-12);

  // Stiffer than the stated convexity bound: the gap flips sign.
  DiffusionSpec stiff = ou(1.0, 0.05, 1.0);
  stiff.drift_neg_gradient = [](double x) { return -50.0 * x; };
  expect_error([&] { simulate_diffusion_coupled(stiff, 0.0, 1.0, rng); }, ErrorCode::StepTooLarge);
}

TEST_CASE("no path crossing for a convex double-well drift") {
  DiffusionSpec s;
  s.drift_neg_gradient = [](double x) { return -(x * x * x + x); };
  s.c = 1.0;
  s.dt = 0.002;
  s.horizon = 2.0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    RngStream a({2, r, "mono"}), b({2, r, "mono"});
    const auto lo = simulate_diffusion_coupled(s, 0.0, 0.5, a);
    const auto hi = simulate_diffusion_coupled(s, 0.0, 1.5, b);
    REQUIRE(lo.x == hi.x);
    for (std::size_t i = 0; i < lo.y.size(); ++i) CHECK(lo.y[i] <= hi.y[i]);
  }
}

TEST_CASE("OU integral") {
  for (double c : {0.5, 1.0, 2.0})
    for (double T : {1.0, 10.0})
      CHECK(std::abs(ou_integral_variance(c, T) - oracle::ou_integral_variance(c, T)) <
            1e-12 * oracle::ou_integral_variance(c, T));
  std::vector<double> v(20000);
  for (std::size_t r = 0; r < v.size(); ++r) {
    RngStream rng({3, r, "ou"});
    v[r] = ou_stationary_integral(1.0, 2.0, 0.01, rng);
  }
  const auto var = variance_estimate(v, {3, 0, "ou-boot"});
  const double ref = ou_integral_variance(1.0, 2.0);
  CHECK(var.ci_lo <= ref * 1.01);
  CHECK(ref * 0.99 <= var.ci_hi);
}

TEST_CASE("Ornstein coupling") {
  RngStream rng({4, 0, "rw"});
  const auto same = simulate_rw_ornstein(2, {1, 1}, {1, 1}, 10.0, rng);
  CHECK(same.coupled);
  CHECK(same.tau == 0.0);

  // Marginal law of each walker is the rate-1 walk.
  for (int d : {1, 2}) {
    const double t = 3.0;
    const std::size_t n = 20000;
    std::vector<double> at_origin(n), at_one(n), coupled(n), coupled_diff(n);
    for (std::size_t r = 0; r < n; ++r) {
      RngStream s({5, r, "rw-marginal"});
      std::vector<long> y(static_cast<std::size_t>(d), 0);
      y[0] = 1;
      const auto res = simulate_rw_ornstein(d, std::vector<long>(static_cast<std::size_t>(d), 0), y, t, s);
      at_origin[r] = std::all_of(res.x_final.begin(), res.x_final.end(), [](long v) { return v == 0; });
      at_one[r] = res.y_final == y;
      coupled[r] = !res.coupled;
      RngStream s2({6, r, "rw-diff"});
      coupled_diff[r] = !ornstein_coupling_time(d, std::vector<long>(static_cast<std::size_t>(d), 0), y, t, s2).coupled;
    }
    const double p0 = rw_kernel(d, t, std::vector<long>(static_cast<std::size_t>(d), 0));
    const auto m0 = mean_se(at_origin);
    CHECK(std::abs(m0.mean - p0) < 3 * m0.se);
    const auto m1 = mean_se(at_one);
    CHECK(std::abs(m1.mean - p0) < 3 * m1.se);
    const double surv = ornstein_survival(d, t);
    const auto mc = mean_se(coupled);
    CHECK(std::abs(mc.mean - surv) < 3 * mc.se);
    const auto md = mean_se(coupled_diff);
    CHECK(std::abs(md.mean - surv) < 3 * md.se);
  }
}

TEST_CASE("exclusion config validation") {
  auto c = sep1d(16, std::vector<std::uint8_t>(16, 0), {{0}});
  c.validate();
  c.L = 15;
  expect_error([&] { c.validate(); }, ErrorCode::InvalidArgument);
  c = sep1d(16, std::vector<std::uint8_t>(15, 0), {{0}});
  expect_error([&] { c.validate(); }, ErrorCode::DimensionMismatch);
  c = sep1d(16, std::vector<std::uint8_t>(16, 0), {{16}});
  expect_error([&] { c.validate(); }, ErrorCode::InvalidArgument);
  c = sep1d(16, std::vector<std::uint8_t>(16, 0), {{0}});
  c.edge_rate = 0.0;
  expect_error([&] { c.validate(); }, ErrorCode::NonPositiveParameter);
  CHECK(SepConfig::default_edge_rate(3) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("exclusion trivial cases and conservation") {
  RngStream rng({7, 0, "sep"});
  const auto empty = simulate_sep(sep1d(32, std::vector<std::uint8_t>(32, 0), {{0}}), {1.0, 5.0}, rng);
  CHECK(empty.F == std::vector<double>{0.0, 0.0});
  const auto full = simulate_sep(sep1d(32, std::vector<std::uint8_t>(32, 1), {{0}}), {1.0, 5.0}, rng);
  CHECK(full.F[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(full.F[1] == doctest::Approx(5.0).epsilon(1e-14));

  const auto eta = bernoulli_configuration(64, 0.3, rng);
  const auto run = simulate_sep(sep1d(64, eta, {{3}, {4}}), {20.0}, rng);
  CHECK(std::count(run.final_config.begin(), run.final_config.end(), 1) == std::count(eta.begin(), eta.end(), 1));
  CHECK(run.F[0] >= 0.0);
  CHECK(run.F[0] <= 20.0);
}

TEST_CASE("exclusion event rate and functional equivalence") {
  // Exchanges per unordered edge at rate edge_rate: d L^d edges.
  SepConfig c;
  c.d = 2;
  c.L = 8;
  c.edge_rate = 0.25;
  RngStream rng({8, 0, "rate"});
  c.initial = bernoulli_configuration(64, 0.5, rng);
  c.functional = OccupationSet{{{0, 0}}};
  std::vector<double> counts;
  for (std::uint64_t r = 0; r < 400; ++r) {
    RngStream s({8, r, "rate"});
    counts.push_back(static_cast<double>(simulate_sep(c, {10.0}, s).events));
  }
  const auto m = mean_se(counts);
  CHECK(std::abs(m.mean - 2 * 64 * 0.25 * 10.0) < 3 * m.se);

  // Occupation set {x} and the local function 1{eta(x) = 1} drive identical runs.
  SepConfig local = c;
  local.functional = LocalFunction{{{0, 0}}, {0.0, 1.0}};
  RngStream a({9, 0, "eq"}), b({9, 0, "eq"});
  const auto ra = simulate_sep(c, {3.0, 7.0}, a);
  const auto rb = simulate_sep(local, {3.0, 7.0}, b);
  CHECK(ra.F == rb.F);
  CHECK(ra.final_config == rb.final_config);
}

TEST_CASE("single particle follows the lattice kernel") {
  const long L = 64;
  const double t = 4.0;
  const std::size_t n = 10000;
  std::vector<std::vector<double>> hit(5, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::uint8_t> eta(L, 0);
    eta[0] = 1;
    RngStream rng({10, r, "particle"});
    const auto run = simulate_sep(sep1d(L, eta, {{0}}), {t}, rng);
    for (long z = 0; z < 5; ++z) hit[static_cast<std::size_t>(z)][r] = run.final_config[static_cast<std::size_t>(z)];
  }
  for (long z = 0; z < 5; ++z) {
    const auto m = mean_se(hit[static_cast<std::size_t>(z)]);
    CHECK(std::abs(m.mean - rw_kernel_1d(t, z)) < 3 * m.se + 1e-12);
  }
}

TEST_CASE("site occupation runs") {
  RngStream rng({11, 0, "sites"});
  auto c = sep1d(32, bernoulli_configuration(32, 0.5, rng), {{0}});
  const long mass = std::count(c.initial.begin(), c.initial.end(), 1);
  const auto run = simulate_sep_sites(c, {2.0, 9.0}, 1, rng);
  REQUIRE(run.sites.size() == 32);
  for (std::size_t h = 0; h < 2; ++h) {
    double total = 0.0;
    for (double v : run.occupation[h]) total += v;
    CHECK(total == doctest::Approx(static_cast<double>(mass) * run.horizons[h]).epsilon(1e-12));
  }
  SepConfig c3;
  c3.d = 3;
  c3.L = 8;
  c3.edge_rate = SepConfig::default_edge_rate(3);
  c3.initial = bernoulli_configuration(512, 0.5, rng);
  c3.functional = OccupationSet{{{0, 0, 0}}};
  CHECK(simulate_sep_sites(c3, {1.0}, 4, rng).sites.size() == 8);
}

TEST_CASE("occupation variance curve matches the duality formula") {
  const std::vector<double> T{2.0, 4.0, 8.0, 16.0, 32.0};
  const auto curve = occupation_variance_curve(1, 64, T, 400, {12, 0, "var"});
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double ref = sep_variance_oracle(1, T[i]);
    CHECK(std::abs(curve.var[i] - ref) <= 0.75 * (curve.ci_hi[i] - curve.ci_lo[i]));
  }
  expect_error([] { occupation_variance_curve(1, 16, {4.0, 9.0}, 10, {1, 0, "x"}); }, ErrorCode::TorusTooSmall);
}

TEST_CASE("coin-flip coupling of exclusion") {
  const long L = 128;
  const std::vector<double> probes{0.5, 2.0, 8.0};
  const std::vector<long> offsets{-3, -2, -1, 0, 1, 2, 3, 4};
  const std::size_t n = 20000;
  std::vector<double> alive(n * probes.size());
  std::vector<double> ind(n * probes.size() * offsets.size());
  std::vector<double> oracle_ind(ind.size());
  for (std::size_t r = 0; r < n; ++r) {
    RngStream rng({13, r, "coupled"});
    auto c = sep1d(L, bernoulli_configuration(L, 0.5, rng), {{0}});
    c.initial[10] = 1;
    c.initial[11] = 0;
    const auto probe = simulate_sep_coupled(c, {10}, probes, offsets, rng);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      bool dead = false;
      int count = 0;
      for (std::size_t j = 0; j < offsets.size(); ++j) {
        ind[(r * probes.size() + i) * offsets.size() + j] = probe.indicator[i][j];
        count += probe.indicator[i][j];
      }
      // Coalescence is absorbing.
      dead = probes[i] >= probe.coalescence;
      if (dead) CHECK(count == 0);
      alive[r * probes.size() + i] = !dead;
    }

    // Oracle: two independent rate-1 walks from 0 and 1, killed when one jumps onto the other.
    RngStream o({14, r, "walks"});
    long a = 0, b = 1;
    double t = 0.0;
    bool met = false;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      while (!met) {
        const double dt = o.exponential(2.0);
        if (t + dt > probes[i]) {
          // Memoryless: restart the clock at the probe.
          t = probes[i];
          break;
        }
        t += dt;
        long& w = o.coin() ? a : b;
        w += o.coin() ? 1 : -1;
        met = a == b;
      }
      for (std::size_t j = 0; j < offsets.size(); ++j)
        oracle_ind[(r * probes.size() + i) * offsets.size() + j] = !met && (a == offsets[j] || b == offsets[j]);
    }
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    std::vector<double> al(n);
    for (std::size_t r = 0; r < n; ++r) al[r] = alive[r * probes.size() + i];
    const auto m = mean_se(al);
    CHECK(std::abs(m.mean - ornstein_survival(1, probes[i])) < 3 * m.se);
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      std::vector<double> x(n), y(n);
      for (std::size_t r = 0; r < n; ++r) {
        x[r] = ind[(r * probes.size() + i) * offsets.size() + j];
        y[r] = oracle_ind[(r * probes.size() + i) * offsets.size() + j];
      }
      const auto mx = mean_se(x);
      const auto my = mean_se(y);
      CHECK(std::abs(mx.mean - my.mean) < 3 * std::hypot(mx.se, my.se) + 1e-12);
    }
  }

  auto bad = sep1d(L, std::vector<std::uint8_t>(L, 1), {{0}});
  RngStream rng({15, 0, "bad"});
  expect_error([&] { simulate_sep_coupled(bad, {0}, {1.0}, {0}, rng); }, ErrorCode::InvalidArgument);
}
