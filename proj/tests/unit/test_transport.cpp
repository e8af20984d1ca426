#include <doctest.h>

#include <random>

#include "cbounds/transport.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"
#include "random_models.hpp"

using namespace cbounds;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Shortest-path closure of random nonnegative weights (zeros allowed, so the
// result may be a semimetric).
Matrix random_closure_metric(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) w(i, j) = w(j, i) = i == j ? 0.0 : (u(gen) < 0.1 ? 0.0 : u(gen));
  return FiniteMetric(w, MetricMode::Semimetric).shortest_path_closure();
}

}  // namespace

TEST_CASE("point masses and identical marginals") {
  const auto rho = FiniteMetric::discrete(2);
  const auto sol = solve_transport(ProbVector::dirac(2, 0), ProbVector::dirac(2, 1), rho);
  CHECK(sol.plan.cost == doctest::Approx(1.0));
  CHECK(sol.plan.pi(0, 1) == doctest::Approx(1.0));
  CHECK(sol.dual.value == doctest::Approx(1.0));
  CHECK(sol.dual.f(0) - sol.dual.f(1) == doctest::Approx(1.0));

  const ProbVector mu(vec({0.2, 0.5, 0.3}));
  const auto same = solve_transport(mu, mu, FiniteMetric::path(3));
  CHECK(same.plan.cost == doctest::Approx(0.0));
  CHECK(same.dual.value == doctest::Approx(0.0));
  for (int i = 0; i < 3; ++i) CHECK(same.plan.pi(i, i) == doctest::Approx(mu[static_cast<std::size_t>(i)]));
}

TEST_CASE("three point path example") {
  const ProbVector mu(vec({0.5, 0.5, 0.0}));
  const ProbVector nu(vec({0.0, 0.5, 0.5}));
  const auto rho = FiniteMetric::path(3);
  const double oracle = oracle::transport_vertex_enumeration(mu.values(), nu.values(), rho.distances());
  CHECK(oracle == doctest::Approx(1.0));
  CHECK(wasserstein_primal(mu, nu, rho).cost == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(wasserstein_dual(mu, nu, rho).value == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("errors") {
  expect_error([] { solve_transport(ProbVector::uniform(2), ProbVector::uniform(3), FiniteMetric::discrete(2)); },
               ErrorCode::DimensionMismatch);
  expect_error([] { solve_transport_raw(vec({0.5, 0.5}), vec({0.5, 0.6}), Matrix::Zero(2, 2), Matrix::Zero(2, 2)); },
               ErrorCode::Degenerate);
}

TEST_CASE("vertex enumeration oracle on random 3 point instances") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const ProbVector mu(testing_models::random_probability(gen, 3, true));
    const ProbVector nu(testing_models::random_probability(gen, 3, true));
    const FiniteMetric rho(testing_models::random_metric(gen, 3), MetricMode::Metric);
    const double ref = oracle::transport_vertex_enumeration(mu.values(), nu.values(), rho.distances());
    const auto sol = solve_transport(mu, nu, rho);
    CHECK(std::abs(sol.plan.cost - ref) < 1e-12);
  }
}

TEST_CASE("path metric against the CDF formula") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 15;
    const ProbVector mu(testing_models::random_probability(gen, n, true));
    const ProbVector nu(testing_models::random_probability(gen, n, true));
    CHECK(std::abs(wasserstein_primal(mu, nu, FiniteMetric::path(static_cast<std::size_t>(n))).cost -
                   oracle::path_w1(mu.values(), nu.values())) < 1e-12);
  }
}

TEST_CASE("strong duality, feasibility and marginals on closure metrics") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 15;
    const ProbVector mu(testing_models::random_probability(gen, n, true));
    const ProbVector nu(testing_models::random_probability(gen, n, true));
    const FiniteMetric rho(random_closure_metric(gen, n), MetricMode::Semimetric);
    const auto sol = solve_transport(mu, nu, rho);
    REQUIRE(std::abs(sol.plan.cost - sol.dual.value) <= 1e-8);
    CHECK((sol.plan.pi.rowwise().sum() - mu.values()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sol.plan.pi.colwise().sum().transpose() - nu.values()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.plan.pi.minCoeff() >= 0.0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) CHECK(sol.dual.f(x) - sol.dual.f(y) <= rho(x, y) + 1e-12);
  }
}

TEST_CASE("symmetry, triangle inequality and total variation") {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 10;
    const ProbVector a(testing_models::random_probability(gen, n));
    const ProbVector b(testing_models::random_probability(gen, n));
    const ProbVector c(testing_models::random_probability(gen, n));
    const FiniteMetric rho(testing_models::random_metric(gen, n), MetricMode::Metric);
    const double ab = wasserstein_primal(a, b, rho).cost;
    CHECK(std::abs(ab - wasserstein_primal(b, a, rho).cost) < 1e-12);
    CHECK(ab <= wasserstein_primal(a, c, rho).cost + wasserstein_primal(c, b, rho).cost + 1e-12);
    const double tv = 0.5 * (a.values() - b.values()).cwiseAbs().sum();
    CHECK(std::abs(wasserstein_primal(a, b, FiniteMetric::discrete(static_cast<std::size_t>(n))).cost - tv) <
          1e-10);
  }
}
