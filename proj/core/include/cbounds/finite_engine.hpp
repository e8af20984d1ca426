#pragma once

#include <cstddef>
#include <vector>

#include "cbounds/rng.hpp"
#include "cbounds/types.hpp"

namespace cbounds {

/// S_t f = e^{tQ} f by uniformization (Poisson tail below 1e-14).
Vector semigroup_apply(const GeneratorMatrix& q, double t, const Vector& f);

/// mu S_t, the law at time t of the chain started from mu.
Vector semigroup_apply_left(const GeneratorMatrix& q, double t, const Vector& mu);

/// e^{tQ} as a stochastic matrix.
Matrix transition_matrix(const GeneratorMatrix& q, double t);

/// e^{tQ} for every t in an increasing grid, built incrementally.
std::vector<Matrix> transition_matrices(const GeneratorMatrix& q, const std::vector<double>& grid);

/// e^M for an arbitrary square matrix; throws Overflow on non-finite results.
Matrix matrix_exp(const Matrix& m);

/// g(T) = int_0^T S_t f dt from g' = f + Qg, g(0) = 0.
Vector integrated_semigroup(const GeneratorMatrix& q, const Vector& f, double horizon);

/// Tabulates g(s) and K(s) on [0, horizon], where
/// K_x(s) = int_0^s sum_y q_xy (g_u(y) - g_u(x))^2 du,
/// and interpolates them with cubic Hermite splines using exact derivatives.
class IntegratedSemigroup {
 public:
  IntegratedSemigroup(const GeneratorMatrix& q, const Vector& f, double horizon);

  double horizon() const noexcept { return horizon_; }
  /// s is clamped to [0, horizon].
  Vector g(double s) const;
  Vector k(double s) const;

 private:
  Vector interpolate(const std::vector<Vector>& values, const std::vector<Vector>& slopes, double s) const;
  Vector k_slope(const Vector& g) const;

  Matrix q_;
  Vector f_;
  double horizon_;
  double step_;
  std::vector<Vector> g_;
  std::vector<Vector> dg_;
  std::vector<Vector> k_;
  std::vector<Vector> dk_;
};

/// log E_mu exp(lambda F) - lambda E_nu F with F = int_0^T f(X_t) dt.
double feynman_kac_logmgf(const GeneratorMatrix& q, const Vector& f, double horizon, double lambda,
                          const ProbVector& mu, const ProbVector& nu);

/// log E_mu exp(lambda F) alone.
double feynman_kac_log_expectation(const GeneratorMatrix& q, const Vector& f, double horizon, double lambda,
                                   const ProbVector& mu);

/// Unique stationary law; throws Reducible when there is more than one closed class.
ProbVector stationary_distribution(const GeneratorMatrix& q);

/// Number of closed communicating classes.
std::size_t closed_class_count(const GeneratorMatrix& q);

struct CtmcPath {
  std::vector<double> jump_times;
  /// states[0] is the initial state, states[k + 1] the state after jump k.
  std::vector<std::size_t> states;
  double horizon = 0.0;
};

CtmcPath sample_ctmc(const GeneratorMatrix& q, std::size_t x0, double horizon, const RngStreamSpec& spec);
CtmcPath sample_ctmc(const GeneratorMatrix& q, std::size_t x0, double horizon, RngStream& rng);

/// int_0^T f(X_t) dt for a piecewise-constant path.
double path_functional(const CtmcPath& path, const Vector& f);

}  // namespace cbounds
