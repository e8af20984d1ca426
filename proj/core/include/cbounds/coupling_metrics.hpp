#pragma once

#include <utility>
#include <vector>

#include "cbounds/types.hpp"

namespace cbounds {

/// 10^-3 .. 10^3 with 64 points per decade.
std::vector<double> default_time_grid();

/// W_rho(delta_x S_t, delta_y S_t).
double rho_t(const GeneratorMatrix& q, const FiniteMetric& rho, std::size_t x, std::size_t y, double t);

/// All pairs at once from a transition matrix P = e^{tQ}.
Matrix rho_t_matrix(const Matrix& p, const FiniteMetric& rho);
Matrix rho_t_matrix(const GeneratorMatrix& q, const FiniteMetric& rho, double t);

/// sup over rho(x, y) > 0 of rho_t(x, y) / rho(x, y).
double lip_ratio(const Matrix& rho_t, const FiniteMetric& rho);

/// Lipschitz seminorm of S_t; rho must be in metric mode.
double lip_norm(const GeneratorMatrix& q, const FiniteMetric& rho, double t);

struct CouplingTimeResult {
  Matrix h;
  /// Panel width; the first grid time with sup rho_t / rho <= 1/2.
  double t_cut = 0.0;
  /// Certified bound on int_{end}^inf rho_t, already added into h.
  double tail_bound = 0.0;
  /// Panel end points used by the quadrature.
  std::vector<double> grid;
};

/// h(x, y) = int_0^inf rho_t(x, y) dt to absolute accuracy `tol`.
CouplingTimeResult coupling_time_h(const GeneratorMatrix& q, const FiniteMetric& rho, double tol = 1e-8);

struct ContractionReport {
  bool is_contraction = false;
  std::vector<std::pair<double, double>> lip_norms;
  /// sup h / rho.
  double M = 0.0;
  /// Late-time slope of log ||S_t||_Lip.
  double decay_rate = 0.0;
  /// decay_rate <= -1/M + 1e-3.
  bool decay_consistent = false;
  /// First grid time with ||S_t||_Lip <= 1/alpha (negative if none).
  double t_alpha = -1.0;
  CouplingTimeResult h;
};

/// Grid verification of contraction, monotonicity and both implications linking
/// h <= M rho with ||S_t||_Lip <= 1/alpha. Throws ContractionViolated with a
/// witness if a check fails on a contracting chain.
ContractionReport contraction_suite(const GeneratorMatrix& q, const FiniteMetric& rho, double alpha,
                                    const std::vector<double>& grid = default_time_grid());

struct LpDecay {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// ||S_t f - mu(f)||_{L^p(mu)} against ||f||_Lip (int mu(dx) (int mu(dy) rho_t(x, y))^p)^{1/p}.
LpDecay lp_decay_check(const GeneratorMatrix& q, const FiniteMetric& rho, const Vector& f, double p, double t);

/// max |f(x) - f(y)| / rho(x, y); infinite if f separates points at distance 0.
double lipschitz_constant(const Vector& f, const FiniteMetric& rho);

}  // namespace cbounds
