#include <cmath>

#include "cbounds/errors.hpp"
#include "cbounds/mc_harness.hpp"
#include "cbounds/parallel.hpp"
#include "cbounds/simulators.hpp"
#include "cbounds_cli/experiments.hpp"

namespace cbounds::cli {

namespace {

struct OuModel {
  std::vector<double> c;
  std::vector<double> lambdas;
  std::vector<double> horizons;
  double path_c = 1.0;
  double path_dt = 0.01;
  double path_horizon = 5.0;
  double x0 = -1.0;
  double y0 = 2.0;
  std::size_t path_replicas = 1000;
  double mc_c = 1.0;
  double mc_horizon = 1.0;
  double mc_dt = 0.001;
};

OuModel parse(const ExperimentConfig& cfg) {
  const Fields m(cfg.model, "model");
  OuModel out;
  out.c = m.positives("c", {});
  out.lambdas = m.numbers("lambdas", {});
  out.horizons = m.positives("horizons", {});
  const Fields p = m.child("pathwise");
  out.path_c = p.positive("c");
  out.path_dt = p.positive("dt");
  out.path_horizon = p.positive("horizon");
  out.x0 = p.number("x0");
  out.y0 = p.number("y0");
  if (out.x0 == out.y0) p.invalid("y0", "must differ from x0");
  out.path_replicas = static_cast<std::size_t>(p.integer("replicas", 1000, 1));
  if (out.path_dt > 0.1 / out.path_c) p.invalid("dt", "must be at most 0.1 / c");
  const Fields mc = m.child("mc");
  out.mc_c = mc.positive("c");
  out.mc_horizon = mc.positive("horizon");
  out.mc_dt = mc.positive("dt");
  if (out.mc_dt > 0.1 / out.mc_c) mc.invalid("dt", "must be at most 0.1 / c");
  return out;
}

void pathwise(const OuModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  const double c = m.path_c;
  struct Potential {
    const char* name;
    std::function<double(double)> drift;
  };
  const std::vector<Potential> potentials{
      {"quadratic", [c](double x) { return -c * x; }},
      {"quartic", [c](double x) { return -c * x - x * x * x; }},
  };
  const double gap0 = std::abs(m.y0 - m.x0);
  for (const auto& pot : potentials) {
    DiffusionSpec spec;
    spec.drift_neg_gradient = pot.drift;
    spec.c = c;
    spec.dt = m.path_dt;
    spec.horizon = m.path_horizon;
    spec.validate();
    struct Stat {
      double ratio = 0.0;
      double h = 0.0;
    };
    const auto stats = parallel_map<Stat>(m.path_replicas, [&](std::size_t r) {
      RngStream rng(RngStreamSpec{cfg.seed, r, std::string("ou/pathwise/") + pot.name});
      const auto path = simulate_diffusion_coupled(spec, m.x0, m.y0, rng);
      double h = 0.0;
      for (std::size_t i = 1; i < path.times.size(); ++i)
        h += 0.5 * (path.times[i] - path.times[i - 1]) *
             (std::abs(path.y[i] - path.x[i]) + std::abs(path.y[i - 1] - path.x[i - 1]));
      return Stat{path.max_gap_ratio, h};
    });
    double worst = 0.0;
    double worst_h = 0.0;
    for (const auto& s : stats) {
      worst = std::max(worst, s.ratio);
      worst_h = std::max(worst_h, s.h);
    }
    const std::string key = std::string("potential=") + pot.name;
    out.at_most("ou_pathwise", key, "max_gap_ratio", worst, 1.0 + cfg.tol("gap_slack") * c * m.path_dt, 0.0, "mc");
    out.at_most("ou_pathwise", key, "int_gap<=|x-y|/c", worst_h, gap0 / c, 0.0, "mc");
  }
}

void gaussian_bound(const OuModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  for (double c : m.c)
    for (double T : m.horizons)
      for (double lambda : m.lambdas) {
        const double exact = 0.5 * lambda * lambda * ou_integral_variance(c, T);
        out.at_most("ou_gaussian_bound", "c=" + format_key(c) + ";T=" + format_key(T) + ";lambda=" + format_key(lambda),
                    "logmgf<=T*lambda^2/c^2", exact, T * lambda * lambda / (c * c), cfg.tol("exact"), "exact");
      }
}

void monte_carlo(const OuModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  const auto samples = parallel_map<double>(cfg.replicas, [&](std::size_t r) {
    RngStream rng(RngStreamSpec{cfg.seed, r, "ou/mc"});
    return ou_stationary_integral(m.mc_c, m.mc_horizon, m.mc_dt, rng);
  });
  SampleBatch batch;
  batch.values = samples;
  for (std::size_t r = 0; r < samples.size(); ++r) batch.provenance.push_back({cfg.seed, r, "ou/mc"});
  const double mean = mean_se(samples).mean;
  const double var = ou_integral_variance(m.mc_c, m.mc_horizon);
  for (double lambda : m.lambdas) {
    std::vector<double> w(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) w[i] = std::exp(lambda * (samples[i] - mean));
    const MeanSe s = mean_se(w);
    const double estimate = std::log(s.mean) + lambda * mean;
    const std::string key = "c=" + format_key(m.mc_c) + ";T=" + format_key(m.mc_horizon) + ";lambda=" + format_key(lambda);
    out.near("ou_mc", key, "mc_logmgf", estimate, 0.5 * lambda * lambda * var, cfg.tol("mc_se") * s.se / s.mean, "mc");
    out.holds("ou_mc", key, "tail_diagnostic", logmgf_estimate(batch, lambda).reliable, "mc");
  }
}

}  // namespace

ExperimentDef ou_experiment() {
  ExperimentDef def;
  def.name = "ou";
  def.title = "Ornstein-Uhlenbeck: synchronous coupling and the Gaussian exponential bound";
  def.tolerances = {{"gap_slack", 10.0}, {"exact", 1e-12}, {"mc_se", 3.0}};
  def.validate = [](const ExperimentConfig& cfg) { (void)parse(cfg); };
  def.run = [](const ExperimentConfig& cfg, ResultSet& out) {
    const OuModel m = parse(cfg);
    pathwise(m, cfg, out);
    gaussian_bound(m, cfg, out);
    monte_carlo(m, cfg, out);
  };
  return def;
}

}  // namespace cbounds::cli
