#pragma once

#include <vector>

#include "cbounds/types.hpp"

namespace cbounds {

/// Rate-1 continuous-time simple random walk on Z: P_0(X_s = m) = e^{-s} I_m(s).
/// Absolute error below max(tol, 1e-17 * value).
double rw_kernel_1d(double s, long m, double tol = 1e-17);

/// p_t(0, x) on Z^d; the walk jumps at total rate 1, so it factorizes into
/// 1D kernels at time t/d.
double rw_kernel(int d, double t, const std::vector<long>& x, double tol = 1e-17);

/// 2 int_0^T p_s(0, 0) ds.
double alpha_T(int d, double horizon, double tol = 1e-12);

struct AlphaCurve {
  int d = 1;
  std::vector<double> T_grid;
  std::vector<double> alpha;
};

AlphaCurve alpha_curve(int d, const std::vector<double>& T_grid, double tol = 1e-12);

struct L2Identity {
  double lhs = 0.0;
  double rhs = 0.0;
  /// |lhs - rhs| / rhs.
  double gap = 0.0;
  long box_radius = 0;
};

/// sum_z (int_0^T p_t(0, z) - p_t(e_1, z) dt)^2 against 2 int_0^T p_s(0,0) - p_{T+s}(0,0) ds.
L2Identity l2_identity_check(int d, double horizon, double tol = 1e-14);

/// P(tau > t) for the Ornstein coupling of neighbours in Z^d.
double ornstein_survival(int d, double t);

struct C1Constant {
  double value = 0.0;
  double quadrature_part = 0.0;
  double tail = 0.0;
  double split = 0.0;
};

/// int_0^inf p_s(0,0) - p_s(e_1,0) ds, computed up to s* by quadrature; the tail
/// beyond s* equals p_{s*}(0,0) exactly because the integrand is -d/ds p_s(0,0).
C1Constant c1_constant(int d, double horizon = 0.0);

struct CInfConstant {
  /// max(grid_sup, limit).
  double value = 0.0;
  /// sup over the grid of T^{-1/2} int_0^T P(tau > s) ds.
  double grid_sup = 0.0;
  /// 2 lim sqrt(s) P(tau > s) = 2 sqrt(d / pi).
  double limit = 0.0;
};

CInfConstant cinf_constant(int d);

/// Uniform bound on |Phi_t(x, y)| for neighbours, given one norm of f.
double phi_bound_rw(double f_norm, NormSpace space, int d, double horizon);

struct NormG {
  double norm = 0.0;
  double squared = 0.0;
  /// Asymptotic tail added to `squared`.
  double tail = 0.0;
  /// Same tail with the measured constant inflated 2x.
  double certified_tail = 0.0;
  double split = 0.0;
  double doubling_change = 0.0;
};

/// |G|_{1->2}^2 <= int_0^inf u p_u(0, 0) du; throws DivergentForDimension for d <= 4.
NormG norm_G_1to2(int d, double tol = 1e-8);

struct ConvLemmaReport {
  int n = 1;
  std::vector<double> T_grid;
  std::vector<double> values;
  /// n = 1: log-log slope over the whole grid.
  double exponent = 0.0;
  /// n = 2: max/min - 1 of value / log(1 + T) over the top decade.
  double log_ratio_variation = 0.0;
  /// n = 3: sup over the grid and relative increase over the last decade.
  double sup = 0.0;
  double last_decade_increase = 0.0;
};

/// I(T) = int_0^T int_0^t (1+s)^{-n/2} (1+t-s)^{-3/2} ds dt.
double conv_integral(int n, double horizon);
ConvLemmaReport conv_lemma_check(int n, const std::vector<double>& T_grid);

}  // namespace cbounds
