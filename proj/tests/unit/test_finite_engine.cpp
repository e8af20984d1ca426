#include <doctest.h>

#include <cmath>
#include <random>

#include "cbounds/finite_engine.hpp"
#include "cbounds/mc_harness.hpp"
#include "cbounds/parallel.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"
#include "random_models.hpp"

using namespace cbounds;

namespace {

GeneratorMatrix two_state(double a, double b) {
  Matrix q(2, 2);
  q << -a, a, b, -b;
  return validate_generator(q);
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("semigroup closed forms") {
  const auto q = two_state(1, 1);
  const Vector f = vec2(1, 0);
  CHECK((semigroup_apply(q, 0.0, f) - f).norm() == 0.0);
  for (double t : {0.1, 1.0, 3.0, 20.0}) {
    const Vector s = semigroup_apply(q, t, f);
    CHECK(std::abs(s(0) - (1 + std::exp(-2 * t)) / 2) < 1e-13);
    CHECK(std::abs(s(1) - (1 - std::exp(-2 * t)) / 2) < 1e-13);
  }
  std::mt19937_64 gen(1);
  const auto r = validate_generator(testing_models::random_generator(gen, 6));
  const Vector c = Vector::Constant(6, 2.5);
  CHECK((semigroup_apply(r, 7.0, c) - c).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("semigroup property, positivity and agreement with the series oracle") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 7;
    const Matrix raw = testing_models::random_generator(gen, n);
    const auto q = validate_generator(raw);
    const Vector f = testing_models::random_observable(gen, n);
    const Vector fs = semigroup_apply(q, 0.7, semigroup_apply(q, 1.3, f));
    CHECK((semigroup_apply(q, 2.0, f) - fs).cwiseAbs().maxCoeff() < 1e-10);
    const Vector pos = semigroup_apply(q, 1.1, f.cwiseAbs());
    CHECK(pos.minCoeff() >= 0.0);
    const Matrix ref = oracle::expm_series(2.0 * raw);
    CHECK((transition_matrix(q, 2.0) - ref).cwiseAbs().maxCoeff() < 1e-12);
    const Vector mu = testing_models::random_probability(gen, n);
    CHECK((semigroup_apply_left(q, 2.0, mu) - (mu.transpose() * ref).transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  const auto q = validate_generator(testing_models::random_generator(gen, 5));
  const std::vector<double> grid{0.0, 0.5, 1.0, 4.0};
  const auto mats = transition_matrices(q, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK((mats[i] - transition_matrix(q, grid[i])).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("matrix exponential") {
  CHECK(matrix_exp(Matrix::Zero(3, 3)).isIdentity(0.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.5;
  d(1, 1) = -2.0;
  const Matrix e = matrix_exp(d);
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.5)).epsilon(1e-15));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(e(0, 1) == 0.0);

  std::mt19937_64 gen(3);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m(4, 4);
    for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = z(gen);
    const Matrix ref = oracle::expm_series(m);
    CHECK(((matrix_exp(m) - ref).cwiseAbs().array() / (1.0 + ref.cwiseAbs().array())).maxCoeff() < 1e-12);
  }
  expect_error([] { matrix_exp(Matrix::Constant(2, 2, 1e3)); }, ErrorCode::Overflow);
}

TEST_CASE("integrated semigroup") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    const Matrix raw = testing_models::random_generator(gen, n);
    const auto q = validate_generator(raw);
    const Vector f = testing_models::random_observable(gen, n);
    const double T = 0.5 + trial;
    const Vector ref = oracle::integrated_semigroup(raw, f, T);
    CHECK((integrated_semigroup(q, f, T) - ref).cwiseAbs().maxCoeff() < 1e-9);
    const IntegratedSemigroup table(q, f, T);
    CHECK((table.g(T) - ref).cwiseAbs().maxCoeff() < 1e-9);
    const Vector mid = oracle::integrated_semigroup(raw, f, 0.37 * T);
    CHECK((table.g(0.37 * T) - mid).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(table.g(0.0).norm() == 0.0);
  }
}

TEST_CASE("Feynman-Kac log-MGF") {
  std::mt19937_64 gen(5);
  const auto q2 = two_state(1, 1);
  const auto d0 = ProbVector::dirac(2, 0);
  CHECK(feynman_kac_logmgf(q2, Vector::Zero(2), 1.0, 3.0, d0, ProbVector::uniform(2)) == doctest::Approx(0.0));
  CHECK(feynman_kac_logmgf(q2, vec2(1, 0), 1.0, 0.0, d0, ProbVector::uniform(2)) == 0.0);

  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 7;
    const Matrix raw = testing_models::random_generator(gen, n);
    const auto q = validate_generator(raw);
    const Vector f = testing_models::random_observable(gen, n);
    const Vector mu = testing_models::random_probability(gen, n);
    const Vector nu = testing_models::random_probability(gen, n);
    for (double lambda : {-1.0, 0.3, 2.0}) {
      const double ref = oracle::fk_logmgf(raw, f, 2.0, lambda, mu, nu);
      CHECK(std::abs(feynman_kac_logmgf(q, f, 2.0, lambda, ProbVector(mu), ProbVector(nu)) - ref) < 1e-10);
    }
    // mu = nu = delta_x: nonnegative and convex in lambda.
    const auto dx = ProbVector::dirac(static_cast<std::size_t>(n), 0);
    std::vector<double> vals;
    for (int k = -4; k <= 4; ++k) vals.push_back(feynman_kac_logmgf(q, f, 2.0, 0.5 * k, dx, dx));
    for (std::size_t k = 0; k < vals.size(); ++k) CHECK(vals[k] >= -1e-12);
    for (std::size_t k = 1; k + 1 < vals.size(); ++k) CHECK(vals[k - 1] + vals[k + 1] - 2 * vals[k] >= -1e-10);
  }
  expect_error([&] { feynman_kac_logmgf(q2, vec2(1, 0), 1e3, 1e3, d0, d0); }, ErrorCode::Overflow);
}

TEST_CASE("Feynman-Kac against a path Monte Carlo oracle") {
  const auto q = two_state(1, 1);
  const Vector f = vec2(1, 0);
  const auto d0 = ProbVector::dirac(2, 0);
  const std::size_t n = 1000000;
  const auto values = parallel_map<double>(n, [&](std::size_t r) {
    RngStream rng(RngStreamSpec{99, r, "fk-oracle"});
    return path_functional(sample_ctmc(q, 0, 1.0, rng), f);
  });
  const double mean = integrated_semigroup(q, f, 1.0)(0);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(values[i] - mean);
  const MeanSe m = mean_se(w);
  const double est = std::log(m.mean);
  const double se = m.se / m.mean;
  CHECK(std::abs(est - feynman_kac_logmgf(q, f, 1.0, 1.0, d0, d0)) < 3 * se);
}

TEST_CASE("stationary distribution") {
  const auto pi = stationary_distribution(two_state(1, 1));
  CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-14));
  const double a = 0.3, b = 1.7;
  const auto p = stationary_distribution(two_state(a, b));
  CHECK(std::abs(p[0] - b / (a + b)) < 1e-14);
  CHECK(std::abs(p[1] - a / (a + b)) < 1e-14);

  Matrix q = Matrix::Zero(4, 4);
  q << -1, 1, 0, 0, 1, -1, 0, 0, 0, 0, -2, 2, 0, 0, 2, -2;
  CHECK(closed_class_count(validate_generator(q)) == 2);
  expect_error([&] { stationary_distribution(validate_generator(q)); }, ErrorCode::Reducible);

  std::mt19937_64 gen(6);
  const Matrix raw = testing_models::random_generator(gen, 7);
  const auto s = stationary_distribution(validate_generator(raw));
  CHECK((s.values().transpose() * raw).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("path sampling") {
  const auto frozen = validate_generator(Matrix::Zero(3, 3));
  const auto path = sample_ctmc(frozen, 1, 5.0, RngStreamSpec{1, 0, "frozen"});
  CHECK(path.jump_times.empty());
  CHECK(path.states == std::vector<std::size_t>{1});
  Vector f(3);
  f << 0.5, 2.0, -1.0;
  CHECK(path_functional(path, f) == 10.0);
  CHECK(path_functional(path, Vector::Ones(3)) == 5.0);

  CtmcPath manual{{0.4}, {0, 2}, 1.0};
  CHECK(path_functional(manual, f) == doctest::Approx(0.5 * 0.4 + -1.0 * 0.6));

  const auto q = two_state(1, 1);
  const double T = 3.0;
  std::vector<double> jumps, holds;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    const auto p = sample_ctmc(q, 0, T, RngStreamSpec{2, r, "jumps"});
    jumps.push_back(static_cast<double>(p.jump_times.size()));
    if (!p.jump_times.empty()) holds.push_back(p.jump_times.front());
  }
  const MeanSe m = mean_se(jumps);
  CHECK(std::abs(m.mean - T) < 3 * m.se);
  // First holding times are Exp(1) truncated at T.
  const double ks = ks_statistic(holds, [&](double t) { return (1 - std::exp(-t)) / (1 - std::exp(-T)); });
  CHECK(ks < ks_critical(holds.size(), 0.01));
}

TEST_CASE("mean of the additive functional matches Monte Carlo") {
  std::mt19937_64 gen(7);
  const Matrix raw = testing_models::random_generator(gen, 5);
  const auto q = validate_generator(raw);
  const Vector f = testing_models::random_observable(gen, 5);
  const Vector nu = testing_models::random_probability(gen, 5);
  std::discrete_distribution<std::size_t> start(nu.data(), nu.data() + nu.size());
  std::vector<double> v;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    const std::size_t x = start(gen);
    v.push_back(path_functional(sample_ctmc(q, x, 2.0, RngStreamSpec{3, r, "mean"}), f));
  }
  const MeanSe m = mean_se(v);
  CHECK(std::abs(m.mean - nu.dot(integrated_semigroup(q, f, 2.0))) < 3 * m.se);
}
