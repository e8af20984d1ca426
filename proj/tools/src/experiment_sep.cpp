#include <algorithm>
#include <cmath>

#include "cbounds/errors.hpp"
#include "cbounds/lattice_kernels.hpp"
#include "cbounds/mc_harness.hpp"
#include "cbounds/parallel.hpp"
#include "cbounds/quadrature.hpp"
#include "cbounds/simulators.hpp"
#include "cbounds_cli/experiments.hpp"

namespace cbounds::cli {

namespace {

struct VarianceBlock {
  int d = 1;
  long L = 2048;
  std::vector<double> T;
  long stride = 0;
  std::size_t replicas = 0;
};

struct CoupledBlock {
  long L = 2048;
  std::vector<double> probe_times;
  long max_offset = 32;
  std::size_t replicas = 20000;
};

struct LogMgfBlock {
  double lambda = 0.05;
  long L = 2048;
  std::vector<double> T;
  long stride = 8;
  std::size_t replicas = 300;
};

struct SepModel {
  VarianceBlock variance;
  VarianceBlock variance_d3;
  VarianceBlock variance_d2;
  CoupledBlock coupled;
  LogMgfBlock logmgf;
};

std::vector<double> horizons(const Fields& f, const std::string& name, std::size_t min_points) {
  auto T = f.positives(name, {});
  if (T.size() < min_points || !std::is_sorted(T.begin(), T.end()) || std::adjacent_find(T.begin(), T.end()) != T.end())
    f.invalid(name, "need at least " + std::to_string(min_points) + " strictly increasing horizons");
  return T;
}

VarianceBlock parse_variance(const Fields& m, const std::string& name, int d, std::size_t replicas) {
  const Fields f = m.child(name);
  VarianceBlock out;
  out.d = d > 0 ? d : static_cast<int>(f.integer("d", 1, 1));
  if (out.d > 3) f.invalid("d", "must be 1, 2 or 3");
  out.L = f.integer("L", 0, 4);
  if (out.L % 2 != 0) f.invalid("L", "must be even");
  out.T = horizons(f, "T", 5);
  if (static_cast<double>(out.L) < 10.0 * std::sqrt(out.T.back())) f.invalid("L", "must be at least 10 sqrt(max T)");
  out.stride = f.integer("stride", 0, 1);
  out.replicas = static_cast<std::size_t>(f.integer("replicas", static_cast<long>(replicas), 2));
  if (out.replicas < 2) f.invalid("replicas", "must be at least 2");
  return out;
}

SepModel parse(const ExperimentConfig& cfg) {
  const Fields m(cfg.model, "model");
  if (cfg.replicas < 2) fail(ErrorCode::ConfigInvalid, "replicas: sep needs at least 2");
  SepModel out;
  out.variance = parse_variance(m, "variance", 0, cfg.replicas);
  out.variance_d3 = parse_variance(m, "variance_d3", 3, cfg.replicas);
  out.variance_d2 = parse_variance(m, "variance_d2", 2, cfg.replicas);

  const Fields c = m.child("coupled");
  out.coupled.L = c.integer("L", 2048, 8);
  if (out.coupled.L % 2 != 0) c.invalid("L", "must be even");
  out.coupled.probe_times = horizons(c, "probe_times", 1);
  out.coupled.max_offset = c.integer("max_offset", 32, 0);
  if (2 * out.coupled.max_offset + 2 > out.coupled.L) c.invalid("max_offset", "probes wrap around the torus");
  out.coupled.replicas = static_cast<std::size_t>(c.integer("replicas", 20000, 2));

  const Fields g = m.child("logmgf");
  out.logmgf.lambda = g.positive("lambda");
  out.logmgf.L = g.integer("L", 2048, 4);
  if (out.logmgf.L % 2 != 0) g.invalid("L", "must be even");
  out.logmgf.T = horizons(g, "T", 5);
  out.logmgf.stride = g.integer("stride", 8, 1);
  out.logmgf.replicas = static_cast<std::size_t>(g.integer("replicas", 300, 2));
  return out;
}

/// Var of the occupation time of one site from product Bernoulli(1/2) starts,
/// (1/2) int_0^T (T - u) p_u(0, 0) du by duality with a single random walk.
double variance_reference(int d, double T) {
  const std::vector<long> origin(static_cast<std::size_t>(d), 0);
  const auto breaks = graded_breaks(std::min(4.0, T), T, 0.25, 1.2);
  return 0.5 * gauss_legendre_panels([&](double u) { return (T - u) * rw_kernel(d, u, origin); }, breaks);
}

void variance(const VarianceBlock& b, const std::string& check, const ExperimentConfig& cfg, ResultSet& out) {
  const RngStreamSpec spec{cfg.seed, 0, "sep/" + check};
  const VarianceCurve curve = occupation_variance_curve(b.d, b.L, b.T, b.replicas, spec, b.stride);
  const std::string base = "d=" + std::to_string(b.d) + ";L=" + std::to_string(b.L);
  for (std::size_t i = 0; i < b.T.size(); ++i) {
    const double half_width = 0.5 * (curve.ci_hi[i] - curve.ci_lo[i]);
    out.near(check, base + ";T=" + format_key(b.T[i]), "variance", curve.var[i], variance_reference(b.d, b.T[i]),
             cfg.tol("variance_ci") * half_width, "mc");
  }
  const FitReport fit = loglog_fit(b.T, curve.var);
  out.info(check, base, "events", static_cast<double>(curve.events), "mc");
  out.info(check, base, "loglog_slope_ci_lo", fit.ci_lo, "mc");
  out.info(check, base, "loglog_slope_ci_hi", fit.ci_hi, "mc");
  if (b.d == 1) {
    out.near(check, base, "loglog_slope", fit.slope, 1.5, cfg.tol("slope_d1"), "mc");
    out.at_most(check, base, "r2>=0.95", 0.95, fit.r2, 0.0, "mc");
  } else if (b.d == 3) {
    out.near(check, base, "loglog_slope", fit.slope, 1.0, cfg.tol("slope_d3"), "mc");
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < b.T.size(); ++i) {
      const double r = curve.var[i] / (b.T[i] * std::log(b.T[i]));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    out.info(check, base, "loglog_slope", fit.slope, "mc");
    out.at_most(check, base, "var/(TlogT)_variation", hi / lo - 1.0, 0.0, cfg.tol("tlogt_ratio"), "mc");
  }
}

void coupled(const CoupledBlock& b, const ExperimentConfig& cfg, ResultSet& out) {
  const long x = b.L / 2;
  std::vector<long> offsets;
  for (long o = -b.max_offset; o <= b.max_offset; ++o) offsets.push_back(o);
  SepConfig base;
  base.d = 1;
  base.L = b.L;
  base.edge_rate = SepConfig::default_edge_rate(1);
  base.functional = OccupationSet{{{x}}};

  struct Replica {
    std::vector<std::vector<std::uint8_t>> ind;
    double coalescence = 0.0;
  };
  const auto reps = parallel_map<Replica>(b.replicas, [&](std::size_t r) {
    RngStream rng(RngStreamSpec{cfg.seed, r, "sep/coupled"});
    SepConfig config = base;
    config.initial = bernoulli_configuration(config.volume(), 0.5, rng);
    config.initial[static_cast<std::size_t>(x)] = 1;
    config.initial[static_cast<std::size_t>(x + 1)] = 0;
    const CoupledSepProbe p = simulate_sep_coupled(config, {x}, b.probe_times, offsets, rng);
    return Replica{p.indicator, p.coalescence};
  });

  // Even replicas fit the constant, odd replicas test it.
  const std::size_t n_train = (b.replicas + 1) / 2;
  const std::size_t n_test = b.replicas / 2;
  auto rate = [&](std::size_t i, std::size_t j, std::size_t parity) {
    std::size_t hits = 0;
    for (std::size_t r = parity; r < reps.size(); r += 2) hits += reps[r].ind[i][j];
    return static_cast<double>(hits) / static_cast<double>(parity == 0 ? n_train : n_test);
  };
  auto gradient = [](double t, long off) { return std::abs(rw_kernel_1d(t, off) - rw_kernel_1d(t, off - 1)); };

  double c_hat = 0.0;
  for (std::size_t i = 0; i < b.probe_times.size(); ++i)
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      const double p = rate(i, j, 0);
      const double g = gradient(b.probe_times[i], offsets[j]);
      if (p > 0.0 && g > 0.0) c_hat = std::max(c_hat, p / g);
    }
  out.info("sep_coupling", "L=" + std::to_string(b.L), "C_hat", c_hat, "mc");
  for (std::size_t i = 0; i < b.probe_times.size(); ++i) {
    const double t = b.probe_times[i];
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      const double p = rate(i, j, 1);
      const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(n_test)) / static_cast<double>(n_test));
      out.at_most("sep_coupling", "t=" + format_key(t) + ";z-x=" + std::to_string(offsets[j]), "discrepancy",
                  p, c_hat * gradient(t, offsets[j]), cfg.tol("coupling_se") * se, "mc");
    }
    std::size_t alive = 0;
    for (const auto& rep : reps)
      if (rep.coalescence > t) ++alive;
    const double s = static_cast<double>(alive) / static_cast<double>(reps.size());
    const double exact = ornstein_survival(1, t);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(reps.size()));
    out.near("sep_coupling", "t=" + format_key(t), "not_coalesced", s, exact, cfg.tol("mc_se") * se, "mc");
  }
}

void logmgf_growth(const LogMgfBlock& b, const ExperimentConfig& cfg, ResultSet& out) {
  SepConfig base;
  base.d = 1;
  base.L = b.L;
  base.edge_rate = SepConfig::default_edge_rate(1);
  base.functional = OccupationSet{{{0}}};
  const auto runs = parallel_map<SepSiteRun>(b.replicas, [&](std::size_t r) {
    RngStream rng(RngStreamSpec{cfg.seed, r, "sep/logmgf"});
    SepConfig config = base;
    config.initial = bernoulli_configuration(config.volume(), 0.5, rng);
    return simulate_sep_sites(config, b.T, b.stride, rng);
  });
  std::vector<double> estimates;
  for (std::size_t h = 0; h < b.T.size(); ++h) {
    SampleBatch batch;
    for (std::size_t r = 0; r < runs.size(); ++r)
      for (double v : runs[r].occupation[h]) {
        batch.values.push_back(v);
        batch.provenance.push_back({cfg.seed, r, "sep/logmgf"});
      }
    const LogMgfEstimate e = logmgf_estimate(batch, b.lambda);
    const std::string key = "lambda=" + format_key(b.lambda) + ";T=" + format_key(b.T[h]);
    out.add({"sep_logmgf", key, "logmgf", e.estimate, std::numeric_limits<double>::quiet_NaN(), e.se, "mc",
             Verdict::Info});
    out.holds("sep_logmgf", key, "tail_diagnostic", e.reliable, "mc");
    estimates.push_back(e.estimate);
  }
  const FitReport fit = loglog_fit(b.T, estimates);
  out.at_most("sep_logmgf", "lambda=" + format_key(b.lambda), "growth_exponent", fit.slope, 1.5,
              cfg.tol("growth_exponent"), "mc");
}

}  // namespace

ExperimentDef sep_experiment() {
  ExperimentDef def;
  def.name = "sep";
  def.title = "symmetric exclusion: occupation-time variance, coin-flip coupling, log-MGF growth";
  def.tolerances = {{"variance_ci", 1.5}, {"slope_d1", 0.15},    {"slope_d3", 0.15},       {"tlogt_ratio", 0.25},
                    {"coupling_se", 3.0}, {"mc_se", 4.0},        {"growth_exponent", 0.15}};
  def.validate = [](const ExperimentConfig& cfg) { (void)parse(cfg); };
  def.run = [](const ExperimentConfig& cfg, ResultSet& out) {
    const SepModel m = parse(cfg);
    variance(m.variance, "sep_variance", cfg, out);
    variance(m.variance_d3, "sep_variance_d3", cfg, out);
    if (cfg.long_mode) variance(m.variance_d2, "sep_variance_d2", cfg, out);
    coupled(m.coupled, cfg, out);
    logmgf_growth(m.logmgf, cfg, out);
  };
  return def;
}

}  // namespace cbounds::cli
