#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cbounds/coupling_metrics.hpp"
#include "cbounds/types.hpp"

namespace cbounds {

/// Phi_t(x, y) = g(T - t)(x) - g(T - t)(y) for the family f 1_{t <= T}.
Matrix phi_matrix(const GeneratorMatrix& q, const ObservableSpec& obs, double t);

enum class PhiMode { ExactTimeIntegral, UniformMajorant };

struct CoupledDifference {
  Matrix phi0;
  PhiMode mode = PhiMode::ExactTimeIntegral;
  double horizon = 0.0;
};

CoupledDifference coupled_difference(const GeneratorMatrix& q, const ObservableSpec& obs, PhiMode mode);

struct SeriesResult {
  /// sup_x and inf_x of sum_{k>=2} (1/k!) sum_y q_xy Phi(y, x)^k, truncated at K.
  double sup_value = 0.0;
  double inf_value = 0.0;
  /// (k, sup_x of the k-th term).
  std::vector<std::pair<int, double>> terms;
  int truncation_k = 1;
  /// Certified bound on the dropped terms, uniformly in x.
  double remainder = 0.0;
};

/// signed = false replaces Phi by |Phi|.
SeriesResult series_sup(const GeneratorMatrix& q, const Matrix& phi, bool signed_phi, double tol = 1e-14);

struct BoundReport {
  double c0 = 1.0;
  std::vector<std::pair<int, double>> series_terms;
  int truncation_k = 1;
  double remainder = 0.0;
  /// Bounds on log E_mu exp(F - E_nu F).
  double upper = 0.0;
  double lower = 0.0;

  double log_c0() const;
};

/// Upper bound uses |Phi|; lower bound uses signed Phi and the infimum.
/// In UniformMajorant mode Phi_t is replaced by H(x, y) = sup_{s <= T} |g(s)(x) - g(s)(y)|.
BoundReport exp_bound(const GeneratorMatrix& q, const ObservableSpec& obs, const ProbVector& mu, const ProbVector& nu,
                      PhiMode mode = PhiMode::ExactTimeIntegral, double tol = 1e-10);

struct BennettResult {
  double bound = 1.0;
  double exponent = 0.0;
  /// Exponent after optimizing lambda; never larger than `exponent`.
  double optimized_exponent = 0.0;
};

BennettResult bennett_deviation(double a, double horizon, double c1, double c2);

struct C1C2 {
  double c1 = 0.0;
  double c2 = 0.0;
  bool degenerate = false;
  /// Largest k for which sup_x A|Phi|^k <= c1 c2^k was checked.
  int verified_up_to = 0;
};

C1C2 extract_c1_c2(const GeneratorMatrix& q, const Matrix& phi0);

/// c0 <= int exp(lipf nu(h(x, .))) mu(dx), series with c_k = T lipf^k over A h^k.
/// `upper` is the log-bound; `lower` is -inf (the bound is one-sided).
BoundReport lipschitz_exp_bound(const GeneratorMatrix& q, const CouplingTimeResult& h, double lipf, double horizon,
                                const ProbVector& mu, const ProbVector& nu);

struct IpsExtras {
  double norm_G_1 = 0.0;
  double triple_norm_f = 0.0;
};

/// T sum_{k>=2} c_k (|G|_{p->2} |delta_f|_p)^k / k!  (+ |G|_1 |||f||| when extras are given).
double ips_bound(double norm_G_p2, double norm_delta_f_p, const std::function<double(int)>& c_k, double horizon,
                 std::optional<IpsExtras> extras = std::nullopt);

struct IpsExclusionReport {
  double norm_G_1to2 = 0.0;
  double norm_G_1to2_squared = 0.0;
  double self_convergence_change = 0.0;
  double log_bound = 0.0;
};

/// Exclusion process in d >= 5: c_k = 2^k and |G|_{1->2} from the lattice kernel.
IpsExclusionReport ips_exclusion_bound(int d, double triple_norm_f, double horizon, double tol = 1e-8);

/// |G|_1 <= (epsilon - M)^{-1} for spin flips in the M < epsilon regime.
double spin_flip_G_norm(double epsilon, double m);

struct MomentBoundReport {
  double p = 2.0;
  double term_qv = 0.0;
  double term_jump = 0.0;
  double term_initial = 0.0;
  double C_p = 0.0;
  double rhs = 0.0;
  double lhs_estimate = 0.0;
  double lhs_se = 0.0;
  double term_qv_se = 0.0;
  double term_jump_se = 0.0;
};

double default_rosenthal_constant(double p);

/// Monte Carlo right-hand side of the Rosenthal-type moment bound together
/// with the Monte Carlo p-th moment of F - E_nu F.
MomentBoundReport moment_bound_rhs(const GeneratorMatrix& q, const ObservableSpec& obs, const ProbVector& mu,
                                   const ProbVector& nu, double p, double C_p, std::size_t n_replicas,
                                   const RngStreamSpec& rng);

}  // namespace cbounds
