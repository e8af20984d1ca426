#include <algorithm>
#include <cmath>

#include "cbounds/errors.hpp"
#include "cbounds/lattice_kernels.hpp"
#include "cbounds/mc_harness.hpp"
#include "cbounds/parallel.hpp"
#include "cbounds/simulators.hpp"
#include "cbounds_cli/experiments.hpp"

namespace cbounds::cli {

namespace {

struct RwModel {
  int d = 1;
  double horizon = 1e4;
  std::vector<double> fit_times;
  std::vector<long> l2_dimensions;
  std::vector<double> l2_horizons;
  double alpha_lo = 10.0;
  double alpha_hi = 1e4;
};

RwModel parse(const ExperimentConfig& cfg) {
  const Fields m(cfg.model, "model");
  RwModel out;
  out.d = static_cast<int>(m.integer("d", 1, 1));
  if (out.d > 8) m.invalid("d", "must be at most 8");
  out.horizon = m.positive("horizon");
  out.fit_times = m.positives("fit_times", {});
  if (out.fit_times.size() < 5) m.invalid("fit_times", "need at least five times");
  if (!std::is_sorted(out.fit_times.begin(), out.fit_times.end()) || out.fit_times.back() > out.horizon)
    m.invalid("fit_times", "must be increasing and not exceed the horizon");
  out.l2_dimensions = m.integers("l2_dimensions", {});
  for (std::size_t i = 0; i < out.l2_dimensions.size(); ++i)
    if (out.l2_dimensions[i] < 1 || out.l2_dimensions[i] > 3)
      m.invalid("l2_dimensions[" + std::to_string(i) + "]", "must be 1, 2 or 3");
  out.l2_horizons = m.positives("l2_horizons", {});
  const auto range = m.positives("alpha_range", {});
  if (range.size() != 2 || !(range[1] >= 10.0 * range[0])) m.invalid("alpha_range", "need [lo, hi] with hi >= 10 lo");
  out.alpha_lo = range[0];
  out.alpha_hi = range[1];
  return out;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> out;
  const int steps = static_cast<int>(std::round(std::log10(hi / lo) * per_decade));
  for (int k = 0; k <= steps; ++k) out.push_back(lo * std::pow(10.0, static_cast<double>(k) / per_decade));
  return out;
}

void coupling_tail(const RwModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  std::vector<long> x(static_cast<std::size_t>(m.d), 0);
  std::vector<long> y = x;
  y[0] = 1;
  const auto runs = parallel_map<OrnsteinResult>(cfg.replicas, [&](std::size_t r) {
    RngStream rng(RngStreamSpec{cfg.seed, r, "rw/ornstein"});
    return ornstein_coupling_time(m.d, x, y, m.horizon, rng);
  });
  std::vector<double> tau;
  for (const auto& run : runs) tau.push_back(run.tau);
  const double n = static_cast<double>(tau.size());
  const std::string dkey = "d=" + std::to_string(m.d);
  std::vector<double> ts;
  std::vector<double> surv;
  for (double t : m.fit_times) {
    const auto alive = std::count_if(runs.begin(), runs.end(),
                                     [t](const OrnsteinResult& r) { return r.tau > t || (!r.coupled && r.tau >= t); });
    const double p = static_cast<double>(alive) / n;
    const double exact = ornstein_survival(m.d, t);
    const double se = std::sqrt(exact * (1.0 - exact) / n);
    out.near("rw_tail", dkey + ";t=" + format_key(t), "survival", p, exact, cfg.tol("mc_se") * se, "mc");
    if (p > 0.0) {
      ts.push_back(t);
      surv.push_back(p);
    }
  }
  if (ts.size() >= 5) {
    const FitReport fit = loglog_fit(ts, surv);
    out.near("rw_tail", dkey, "loglog_slope", fit.slope, -0.5, cfg.tol("tail_slope"), "mc");
    out.info("rw_tail", dkey, "r2", fit.r2, "mc");
  } else {
    out.holds("rw_tail", dkey, "enough_survivors", false, "mc");
  }
  const double H = m.horizon;
  const int d = m.d;
  const double ks = ks_statistic(tau, [H, d](double t) { return t >= H ? 1.0 : 1.0 - ornstein_survival(d, t); });
  out.at_most("rw_tail", dkey, "ks_distance", ks, cfg.tol("ks"), 0.0, "mc");
}

void l2_identity(const RwModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  for (long d : m.l2_dimensions)
    for (double T : m.l2_horizons) {
      const L2Identity r = l2_identity_check(static_cast<int>(d), T);
      out.at_most("l2_identity", "d=" + std::to_string(d) + ";T=" + format_key(T), "relative_gap", r.gap, 0.0,
                  cfg.tol("l2_identity"), "quadrature");
    }
}

void alpha_orders(const RwModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  const auto grid = log_grid(m.alpha_lo, m.alpha_hi, 8);
  const std::string range = "T=" + format_key(m.alpha_lo) + ".." + format_key(m.alpha_hi);

  const AlphaCurve c1 = alpha_curve(1, grid);
  const FitReport fit = loglog_fit(c1.T_grid, c1.alpha);
  out.near("alpha_order", "d=1;" + range, "loglog_slope", fit.slope, 0.5, cfg.tol("alpha_slope"), "quadrature");

  const double top_lo = m.alpha_hi / 10.0;
  const AlphaCurve c2 = alpha_curve(2, grid);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] >= top_lo * (1.0 - 1e-12)) {
      const double r = c2.alpha[i] / std::log(grid[i]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  out.at_most("alpha_order", "d=2;" + range, "alpha/logT_variation", hi / lo - 1.0, 0.0, cfg.tol("alpha_log_ratio"),
              "quadrature");

  const double a_hi = alpha_T(3, m.alpha_hi);
  const double a_lo = alpha_T(3, top_lo);
  out.at_most("alpha_order", "d=3;" + range, "last_decade_growth", (a_hi - a_lo) / a_lo, 0.0, cfg.tol("alpha_growth"),
              "quadrature");
}

void constants(const RwModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  for (long d : m.l2_dimensions) {
    const std::string key = "d=" + std::to_string(d);
    const C1Constant c1 = c1_constant(static_cast<int>(d));
    out.near("rw_constants", key, "C1", c1.value, 1.0, cfg.tol("c1"), "quadrature");
    const CInfConstant cinf = cinf_constant(static_cast<int>(d));
    out.info("rw_constants", key, "Cinf", cinf.value, "quadrature");
    for (double T : m.l2_horizons) {
      const std::string tkey = key + ";T=" + format_key(T);
      out.info("rw_phi_bound", tkey, "l1", phi_bound_rw(1.0, NormSpace::L1, static_cast<int>(d), T), "quadrature");
      out.info("rw_phi_bound", tkey, "l2", phi_bound_rw(1.0, NormSpace::L2, static_cast<int>(d), T), "quadrature");
      out.info("rw_phi_bound", tkey, "linf", phi_bound_rw(1.0, NormSpace::Linf, static_cast<int>(d), T), "quadrature");
    }
  }
  const auto grid = log_grid(1e2, 1e5, 4);
  out.near("convolution", "n=1", "exponent", conv_lemma_check(1, grid).exponent, 0.5, cfg.tol("conv_exponent"),
           "quadrature");
  out.at_most("convolution", "n=2", "value/log(1+T)_variation", conv_lemma_check(2, grid).log_ratio_variation, 0.0,
              cfg.tol("conv_log_ratio"), "quadrature");
  out.at_most("convolution", "n=3", "last_decade_increase", conv_lemma_check(3, grid).last_decade_increase, 0.0,
              cfg.tol("alpha_growth"), "quadrature");
}

}  // namespace

ExperimentDef rw_experiment() {
  ExperimentDef def;
  def.name = "rw";
  def.title = "random walk: Ornstein coupling tail, kernel identities and growth orders";
  def.tolerances = {{"mc_se", 4.0},       {"tail_slope", 0.05},      {"ks", 0.02},          {"l2_identity", 1e-6},
                    {"alpha_slope", 0.03}, {"alpha_log_ratio", 0.10}, {"alpha_growth", 0.05}, {"c1", 1e-8},
                    {"conv_exponent", 0.05}, {"conv_log_ratio", 0.15}};
  def.validate = [](const ExperimentConfig& cfg) { (void)parse(cfg); };
  def.run = [](const ExperimentConfig& cfg, ResultSet& out) {
    const RwModel m = parse(cfg);
    coupling_tail(m, cfg, out);
    l2_identity(m, cfg, out);
    alpha_orders(m, cfg, out);
    constants(m, cfg, out);
  };
  return def;
}

}  // namespace cbounds::cli
