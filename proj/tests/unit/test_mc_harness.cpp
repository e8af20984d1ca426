#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "cbounds/mc_harness.hpp"
#include "cbounds/rng.hpp"
#include "expect_error.hpp"

using namespace cbounds;

namespace {

SampleBatch batch_of(std::vector<double> v) {
  SampleBatch b;
  b.values = std::move(v);
  for (std::size_t i = 0; i < b.values.size(); ++i) b.provenance.push_back({1, i, "synthetic"});
  return b;
}

std::vector<double> normals(std::size_t n, double sigma, std::uint64_t seed) {
  RngStream rng({seed, 0, "normals"});
  std::vector<double> v(n);
  for (auto& x : v) x = sigma * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("batches") {
  SampleBatch b = batch_of({1.0, 2.0});
  b.validate();
  b.provenance.pop_back();
  expect_error([&] { b.validate(); }, ErrorCode::DegenerateBatch);
  expect_error([] { SampleBatch{}.validate(); }, ErrorCode::DegenerateBatch);
  expect_error([] { logmgf_estimate(batch_of(std::vector<double>(99, 1.0)), 0.5); }, ErrorCode::DegenerateBatch);
  expect_error([] { moment_estimate(batch_of(std::vector<double>(10, 1.0)), 2.0, std::nullopt, {}); },
               ErrorCode::DegenerateBatch);
}

TEST_CASE("log-MGF estimator") {
  const auto constant = logmgf_estimate(batch_of(std::vector<double>(500, 3.0)), 0.7);
  CHECK(constant.estimate == 0.0);
  CHECK(constant.se == 0.0);
  const auto v = normals(100000, 1.3, 2);
  CHECK(logmgf_estimate(batch_of(v), 0.0).estimate == 0.0);
  for (double lambda : {0.2, 0.5, 1.0}) {
    const auto e = logmgf_estimate(batch_of(v), lambda);
    CHECK(e.reliable);
    CHECK(std::abs(e.estimate - 0.5 * lambda * lambda * 1.69) < 3.0 * e.se);
  }
  // A single huge outlier carries the exp-weight.
  std::vector<double> heavy(1000, 0.0);
  heavy[17] = 50.0;
  const auto h = logmgf_estimate(batch_of(heavy), 1.0);
  CHECK_FALSE(h.reliable);
  CHECK(h.top_share > 0.5);
}

TEST_CASE("moment estimator") {
  const auto c = moment_estimate(batch_of(std::vector<double>(200, 2.0)), 3.0, std::nullopt, {1, 0, "b"});
  CHECK(c.estimate == 0.0);

  const auto v = normals(5000, 2.0, 3);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  const auto m2 = moment_estimate(batch_of(v), 2.0, std::nullopt, {1, 0, "b"});
  CHECK(std::abs(m2.estimate - sd) < 1e-12);
  CHECK(m2.ci_lo <= m2.estimate);
  CHECK(m2.ci_hi >= m2.estimate);

  // Exponential(1), p = 3, centred at 1.
  const double ref = std::cbrt(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                   [](double x) { return std::pow(std::abs(x - 1.0), 3) * std::exp(-x); }, 0.0, 1.0) +
                               boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                   [](double x) { return std::pow(x - 1.0, 3) * std::exp(-x); }, 1.0,
                                   std::numeric_limits<double>::infinity()));
  RngStream rng({4, 0, "exp"});
  std::vector<double> e(20000);
  for (auto& x : e) x = rng.exponential(1.0);
  const auto m3 = moment_estimate(batch_of(e), 3.0, 1.0, {4, 1, "boot"});
  CHECK(m3.ci_lo <= ref);
  CHECK(ref <= m3.ci_hi);

  // Bootstrap with a fixed stream is bit-reproducible, and the estimate is permutation invariant.
  const auto again = moment_estimate(batch_of(e), 3.0, 1.0, {4, 1, "boot"});
  CHECK(again.ci_lo == m3.ci_lo);
  CHECK(again.ci_hi == m3.ci_hi);
  std::vector<double> shuffled = e;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(5));
  CHECK(moment_estimate(batch_of(shuffled), 3.0, 1.0, {4, 1, "boot"}).estimate == m3.estimate);
  CHECK(logmgf_estimate(batch_of(shuffled), 0.3).estimate == logmgf_estimate(batch_of(e), 0.3).estimate);
}

TEST_CASE("stable sum and variance") {
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(stable_sum(v) == stable_sum({1.0, -1e16, 1.0, 1e16}));
  const auto n = normals(20000, 3.0, 6);
  const auto var = variance_estimate(n, {6, 0, "var"});
  CHECK(var.ci_lo <= 9.0);
  CHECK(9.0 <= var.ci_hi);
  const MeanSe m = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(std::abs(m.se - std::sqrt(5.0 / 3.0 / 4.0)) < 1e-15);
}

TEST_CASE("log-log fit") {
  std::vector<double> xs{1, 2, 4, 8, 16, 32, 64};
  const auto same = loglog_fit(xs, xs);
  CHECK(std::abs(same.slope - 1.0) < 1e-14);
  CHECK(std::abs(same.r2 - 1.0) < 1e-14);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(std::pow(x, 1.5));
  CHECK(std::abs(loglog_fit(xs, ys).slope - 1.5) < 1e-14);

  RngStream rng({7, 0, "fit"});
  std::vector<double> grid, noisy;
  for (int k = 0; k <= 20; ++k) {
    const double x = std::pow(10.0, 1.0 + k * 0.1);
    grid.push_back(x);
    noisy.push_back(std::pow(x, 1.5) * (1.0 + 0.05 * rng.normal()));
  }
  const auto fit = loglog_fit(grid, noisy);
  CHECK(fit.slope >= 1.4);
  CHECK(fit.slope <= 1.6);
  CHECK(fit.r2 >= 0.98);
  CHECK(fit.ci_lo <= fit.slope);
  CHECK(fit.slope <= fit.ci_hi);
  expect_error([] { loglog_fit({1, 2, 3, 4, 5}, {1, 2, 0, 4, 5}); }, ErrorCode::NonPositiveData);
  expect_error([] { loglog_fit({1, 2, 3}, {1, 2, 3}); }, ErrorCode::InvalidArgument);
}

TEST_CASE("Kolmogorov-Smirnov") {
  RngStream rng({8, 0, "ks"});
  std::vector<double> u(5000);
  for (auto& x : u) x = rng.uniform();
  CHECK(ks_statistic(u, [](double x) { return x; }) < ks_critical(u.size(), 0.01));
  CHECK(ks_statistic(u, [](double x) { return x * x; }) > ks_critical(u.size(), 0.01));
  CHECK(ks_critical(100, 0.05) == doctest::Approx(1.3581 / 10.0).epsilon(1e-3));
}
