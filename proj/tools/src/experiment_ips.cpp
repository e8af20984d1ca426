#include <cmath>

#include "cbounds/bounds.hpp"
#include "cbounds/errors.hpp"
#include "cbounds_cli/experiments.hpp"

namespace cbounds::cli {

namespace {

struct IpsModel {
  int d = 5;
  double triple_norm_f = 1.0;
  double horizon = 10.0;
  std::vector<double> series_g;
  double series_horizon = 1.0;
  double epsilon = 1.0;
  double M = 0.5;
};

IpsModel parse(const ExperimentConfig& cfg) {
  const Fields m(cfg.model, "model");
  IpsModel out;
  out.d = static_cast<int>(m.integer("d", 5, 1));
  if (out.d < 5) m.invalid("d", "the Green-function norm diverges for d <= 4");
  if (out.d > 12) m.invalid("d", "must be at most 12");
  out.triple_norm_f = m.positive("triple_norm_f");
  out.horizon = m.positive("horizon");
  const Fields s = m.child("series");
  out.series_g = s.positives("g", {});
  out.series_horizon = s.positive("horizon");
  const Fields sf = m.child("spin_flip");
  out.epsilon = sf.positive("epsilon");
  out.M = sf.number("M");
  if (out.M < 0.0 || out.M >= out.epsilon) sf.invalid("M", "must satisfy 0 <= M < epsilon");
  return out;
}

}  // namespace

ExperimentDef ips_experiment() {
  ExperimentDef def;
  def.name = "ips";
  def.title = "interacting particle systems: Green-function norms and the series bound";
  def.tolerances = {{"norm_G", 1e-8}, {"series", 1e-10}, {"spin_flip", 1e-12}};
  def.validate = [](const ExperimentConfig& cfg) { (void)parse(cfg); };
  def.run = [](const ExperimentConfig& cfg, ResultSet& out) {
    const IpsModel m = parse(cfg);
    const std::string key = "d=" + std::to_string(m.d) + ";T=" + format_key(m.horizon);
    const IpsExclusionReport r = ips_exclusion_bound(m.d, m.triple_norm_f, m.horizon, cfg.tol("norm_G"));
    out.info("ips_exclusion", key, "norm_G_1to2", r.norm_G_1to2, "quadrature");
    out.info("ips_exclusion", key, "norm_G_1to2_squared", r.norm_G_1to2_squared, "quadrature");
    out.info("ips_exclusion", key, "log_bound", r.log_bound, "quadrature");
    out.holds("ips_exclusion", key, "bound_finite", std::isfinite(r.log_bound), "quadrature");
    out.at_most("ips_exclusion", key, "doubling_change", r.self_convergence_change, 0.0, cfg.tol("norm_G"),
                "quadrature");

    for (double g : m.series_g) {
      const double series = ips_bound(g, 1.0, [](int k) { return std::ldexp(1.0, k); }, m.series_horizon);
      const double closed = m.series_horizon * (std::expm1(2.0 * g) - 2.0 * g);
      out.near("ips_series", "g=" + format_key(g) + ";T=" + format_key(m.series_horizon), "c_k=2^k", series, closed,
               cfg.tol("series"), "exact");
    }

    const double G1 = spin_flip_G_norm(m.epsilon, m.M);
    const std::string sk = "epsilon=" + format_key(m.epsilon) + ";M=" + format_key(m.M);
    out.near("ips_spin_flip", sk, "norm_G_1", G1, 1.0 / (m.epsilon - m.M), cfg.tol("spin_flip"), "exact");
  };
  return def;
}

}  // namespace cbounds::cli
