#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "cbounds/rng.hpp"
#include "cbounds/types.hpp"

namespace cbounds {

// ---- Diffusions with a convex potential -------------------------------------

struct DiffusionSpec {
  /// x -> -V'(x).
  std::function<double(double)> drift_neg_gradient;
  /// Lower bound on V''.
  double c = 1.0;
  double dt = 0.01;
  double horizon = 1.0;

  void validate() const;
};

struct CoupledDiffusionPath {
  /// Sampled every `record_every` steps (always including t = 0 and t = T).
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> y;
  /// sup_t (|Y_t - X_t| / (|y0 - x0| e^{-ct}) - 1) / dt, the Gronwall slack.
  double gronwall_K = 0.0;
  /// sup_t |Y_t - X_t| / (|y0 - x0| e^{-ct}).
  double max_gap_ratio = 0.0;
};

/// Euler-Maruyama for dX = -V'(X) dt + sqrt(2) dW for both copies with the same increments.
/// Throws StepTooLarge when the gap changes sign or grows over a step.
CoupledDiffusionPath simulate_diffusion_coupled(const DiffusionSpec& spec, double x0, double y0, RngStream& rng,
                                                std::size_t record_every = 1);

/// int_0^T X_t dt (trapezoid on the Euler-Maruyama grid) for the Ornstein-Uhlenbeck
/// process dX = -cX dt + sqrt(2) dW started from N(0, 1/c).
double ou_stationary_integral(double c, double horizon, double dt, RngStream& rng);

/// Var of int_0^T X dt for the stationary OU process: (2/c^2)(T - (1 - e^{-cT})/c).
double ou_integral_variance(double c, double horizon);

// ---- Random walks with the Ornstein coupling --------------------------------

struct OrnsteinResult {
  /// Coupling time; equals the horizon when censored.
  double tau = 0.0;
  bool coupled = false;
  std::vector<long> x_final;
  std::vector<long> y_final;
};

/// Rate-1 walks on Z^d started at x and y; coordinates move independently until
/// they agree and together afterwards.
OrnsteinResult simulate_rw_ornstein(int d, const std::vector<long>& x, const std::vector<long>& y, double horizon,
                                    RngStream& rng);

/// Coupling time only (tracks coordinate differences).
OrnsteinResult ornstein_coupling_time(int d, const std::vector<long>& x, const std::vector<long>& y, double horizon,
                                      RngStream& rng);

// ---- Symmetric exclusion on the torus ----------------------------------------

struct OccupationSet {
  /// Sites as coordinate vectors in [0, L)^d.
  std::vector<std::vector<long>> sites;
};

/// f(eta) = table[bits of eta on window], bit i = eta(window[i]).
struct LocalFunction {
  std::vector<std::vector<long>> window;
  std::vector<double> table;
};

struct SepConfig {
  int d = 1;
  long L = 16;
  /// Exchange rate per unordered edge; a lone particle then jumps at rate 2 d edge_rate.
  double edge_rate = 0.5;
  std::vector<std::uint8_t> initial;
  std::variant<OccupationSet, LocalFunction> functional;

  static double default_edge_rate(int d) { return 1.0 / (2.0 * d); }
  std::size_t volume() const;
  std::size_t site_index(const std::vector<long>& x) const;
  void validate() const;
};

struct SepRun {
  std::vector<double> horizons;
  /// F at each horizon.
  std::vector<double> F;
  std::uint64_t events = 0;
  /// Configuration at the last horizon.
  std::vector<std::uint8_t> final_config;
};

/// Graphical construction; events that touch the functional's window are drawn
/// with exact exponential times, all other exchanges are applied in between as
/// Poisson counts of uniformly chosen edges.
SepRun simulate_sep(const SepConfig& config, const std::vector<double>& horizons, RngStream& rng);

/// Product Bernoulli(density) configuration.
std::vector<std::uint8_t> bernoulli_configuration(std::size_t volume, double density, RngStream& rng);

struct SepSiteRun {
  std::vector<double> horizons;
  std::vector<std::size_t> sites;
  /// occupation[h][i] = int_0^{horizons[h]} eta_t(sites[i]) dt.
  std::vector<std::vector<double>> occupation;
  std::uint64_t events = 0;
};

/// Occupation times of every `stride`-th site in each coordinate, all horizons in one run.
SepSiteRun simulate_sep_sites(const SepConfig& config, const std::vector<double>& horizons, long stride,
                              RngStream& rng);

struct CoupledSepProbe {
  std::vector<double> times;
  /// Site offsets z - x probed at every time.
  std::vector<long> offsets;
  /// indicator[i][j] = 1{eta1_t(z) != eta2_t(z)} at times[i], z = x + offsets[j] e_1.
  std::vector<std::vector<std::uint8_t>> indicator;
  /// Coalescence time of the two discrepancies, or +inf.
  double coalescence = 0.0;
  std::uint64_t events = 0;
};

/// Coin-flip coupling of eta and eta^{xy} for neighbours x, y = x + e_1: rate 2 edge_rate
/// clocks, a fair coin per ring; on the edge joining the discrepancies exactly one copy
/// exchanges. Throws InvariantBroken if the copies ever differ off the discrepancy set.
CoupledSepProbe simulate_sep_coupled(const SepConfig& config, const std::vector<long>& x, const std::vector<double>& probe_times,
                                     const std::vector<long>& offsets, RngStream& rng);

struct VarianceCurve {
  std::vector<double> T;
  std::vector<double> var;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::uint64_t events = 0;
};

/// Var of int_0^T eta_t(0) dt from Bernoulli(1/2) starts, averaged over translates of
/// the observed site; CIs by bootstrap over replicas. Throws TorusTooSmall unless L >= 10 sqrt(max T).
VarianceCurve occupation_variance_curve(int d, long L, const std::vector<double>& T_grid, std::size_t replicas,
                                        const RngStreamSpec& rng, long stride = 0);

}  // namespace cbounds
