#include <cmath>

#include "cbounds/bounds.hpp"
#include "cbounds/coupling_metrics.hpp"
#include "cbounds/errors.hpp"
#include "cbounds/finite_engine.hpp"
#include "cbounds/mc_harness.hpp"
#include "cbounds/parallel.hpp"
#include "cbounds/transport.hpp"
#include "cbounds_cli/experiments.hpp"

namespace cbounds::cli {

namespace {

struct FiniteModel {
  GeneratorMatrix q = GeneratorMatrix::validate(Matrix::Zero(1, 1));
  Vector f;
  double horizon = 1.0;
  std::vector<double> lambdas;
  ProbVector mu = ProbVector::uniform(1);
  ProbVector nu = ProbVector::uniform(1);
  FiniteMetric rho = FiniteMetric::discrete(1);
  double alpha = 2.0;
  std::vector<double> times;
  std::vector<double> lp_orders;
  std::vector<double> lp_times;
  std::vector<double> deviations;
};

ProbVector parse_distribution(const Fields& m, const std::string& name, const GeneratorMatrix& q) {
  const std::size_t n = q.size();
  const json& v = m.raw(name);
  try {
    if (v.is_string()) {
      if (v.get<std::string>() == "stationary") return stationary_distribution(q);
      if (v.get<std::string>() == "uniform") return ProbVector::uniform(n);
      m.invalid(name, "expected \"stationary\", \"uniform\", {\"dirac\": i} or a probability vector");
    }
    if (v.is_object()) {
      const Fields d(v, m.path_of(name));
      const long i = d.integer("dirac", -1, 0);
      if (i < 0 || static_cast<std::size_t>(i) >= n) d.invalid("dirac", "state out of range");
      return ProbVector::dirac(n, static_cast<std::size_t>(i));
    }
    const auto p = m.numbers(name, {});
    if (p.size() != n) m.invalid(name, "must have one entry per state");
    return ProbVector(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(n)));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    m.invalid(name, e.what());
  }
}

FiniteModel parse(const ExperimentConfig& cfg) {
  const Fields m(cfg.model, "model");
  FiniteModel out;
  try {
    out.q = GeneratorMatrix::validate(m.matrix("generator"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    m.invalid("generator", e.what());
  }
  const std::size_t n = out.q.size();
  const auto f = m.numbers("observable", {});
  if (f.size() != n) m.invalid("observable", "must have one entry per state");
  out.f = Eigen::Map<const Vector>(f.data(), static_cast<Eigen::Index>(n));
  out.horizon = m.positive("horizon");
  out.lambdas = m.numbers("lambdas", {});
  out.mu = parse_distribution(m, "mu", out.q);
  out.nu = parse_distribution(m, "nu", out.q);

  const json& metric = m.raw("metric");
  if (metric.is_string()) {
    const auto name = metric.get<std::string>();
    if (name == "discrete") {
      out.rho = FiniteMetric::discrete(n);
    } else if (name == "path") {
      out.rho = FiniteMetric::path(n);
    } else {
      m.invalid("metric", "expected \"discrete\", \"path\" or a distance matrix");
    }
  } else {
    const Matrix d = m.matrix("metric");
    if (static_cast<std::size_t>(d.rows()) != n) m.invalid("metric", "size differs from the generator");
    try {
      out.rho = FiniteMetric(d, satisfies_triangle(d) ? MetricMode::Metric : MetricMode::Semimetric);
    } catch (const Error& e) {
      m.invalid("metric", e.what());
    }
  }
  out.alpha = m.number("alpha");
  if (!(out.alpha > 1.0)) m.invalid("alpha", "must exceed 1");
  out.times = m.positives("times", {});
  out.lp_orders = m.numbers("lp_orders", {});
  for (std::size_t i = 0; i < out.lp_orders.size(); ++i)
    if (!(out.lp_orders[i] >= 1.0)) m.invalid("lp_orders[" + std::to_string(i) + "]", "must be >= 1");
  out.lp_times = m.positives("lp_times", {});
  out.deviations = m.positives("deviations", {});
  if (closed_class_count(out.q) != 1) m.invalid("generator", "chain must have a single closed class");
  return out;
}

std::string pair_key(std::size_t x, std::size_t y) { return "x=" + std::to_string(x) + ";y=" + std::to_string(y); }

void sandwich(const FiniteModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  const double tol = cfg.tol("sandwich");
  for (double lambda : m.lambdas) {
    const std::string key = "lambda=" + format_key(lambda);
    const double exact = feynman_kac_logmgf(m.q, m.f, m.horizon, lambda, m.mu, m.nu);
    const auto obs = ObservableSpec::finite(lambda * m.f, m.horizon);
    const BoundReport b = exp_bound(m.q, obs, m.mu, m.nu, PhiMode::ExactTimeIntegral);
    const BoundReport maj = exp_bound(m.q, obs, m.mu, m.nu, PhiMode::UniformMajorant);
    out.at_most("sandwich", key, "exact<=upper", exact, b.upper, tol, "quadrature");
    out.at_most("sandwich", key, "lower<=exact", b.lower, exact, tol, "quadrature");
    out.at_most("sandwich", key, "upper<=majorant", b.upper, maj.upper, tol, "quadrature");
    out.info("sandwich", key, "log_c0", b.log_c0(), "exact");
    out.info("sandwich", key, "truncation_k", b.truncation_k, "exact");
  }
}

void duality(const FiniteModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  const std::size_t n = m.q.size();
  const FiniteMetric closure(m.rho.shortest_path_closure(), MetricMode::Metric);
  for (double t : m.times) {
    const Matrix p = transition_matrix(m.q, t);
    double worst = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y) {
        const ProbVector px(Vector(p.row(static_cast<Eigen::Index>(x)).transpose()));
        const ProbVector py(Vector(p.row(static_cast<Eigen::Index>(y)).transpose()));
        const double primal = wasserstein_primal(px, py, closure).cost;
        const double dual = wasserstein_dual(px, py, m.rho).value;
        worst = std::max(worst, std::abs(primal - dual));
      }
    out.near("duality", "t=" + format_key(t), "max_primal_dual_gap", worst, 0.0, cfg.tol("duality"), "exact");
  }
}

void two_state(const FiniteModel& m, const ExperimentConfig& cfg, ResultSet& out, const ContractionReport* report) {
  const double a = m.q(0, 1);
  const double b = m.q(1, 0);
  for (double t : m.times)
    out.near("two_state", "t=" + format_key(t), "rho_t(0,1)", rho_t(m.q, m.rho, 0, 1, t), std::exp(-(a + b) * t),
             cfg.tol("rho_closed_form"), "exact");
  const auto h = coupling_time_h(m.q, m.rho);
  out.near("two_state", pair_key(0, 1), "h", h.h(0, 1), 1.0 / (a + b), cfg.tol("h_closed_form"), "quadrature");
  out.at_most("two_state", pair_key(0, 1), "h_tail_certificate", h.tail_bound, cfg.tol("h_closed_form"), 0.0,
              "quadrature");
  if (report != nullptr && report->is_contraction)
    out.near("two_state", pair_key(0, 1), "decay_rate", report->decay_rate, -(a + b), cfg.tol("decay_rate"), "exact");
}

void contraction(const FiniteModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  const bool two_state_case = m.q.size() == 2 && m.rho(0, 1) == 1.0;
  if (m.rho.mode() != MetricMode::Metric) {
    out.info("contraction", "metric", "semimetric_skipped", 1.0, "exact");
    if (two_state_case) two_state(m, cfg, out, nullptr);
    return;
  }
  const std::string key = "alpha=" + format_key(m.alpha);
  try {
    const ContractionReport r = contraction_suite(m.q, m.rho, m.alpha);
    out.info("contraction", key, "is_contraction", r.is_contraction ? 1.0 : 0.0, "exact");
    if (r.is_contraction) {
      out.holds("contraction", key, "implications", true, "exact");
      out.info("contraction", key, "M", r.M, "quadrature");
      out.info("contraction", key, "t_alpha", r.t_alpha, "exact");
      out.at_most("contraction", key, "decay_rate<=-1/M", r.decay_rate, -1.0 / r.M, cfg.tol("decay_rate"), "exact");
    }
    if (two_state_case) two_state(m, cfg, out, &r);
  } catch (const ContractionViolated& e) {
    out.holds("contraction", key + ";x=" + std::to_string(e.x()) + ";y=" + std::to_string(e.y()) + ";t=" +
                                 format_key(e.t()),
              "implications", false, "exact");
    if (two_state_case) two_state(m, cfg, out, nullptr);
  }
  for (double p : m.lp_orders)
    for (double t : m.lp_times) {
      const LpDecay d = lp_decay_check(m.q, m.rho, m.f, p, t);
      out.at_most("lp_decay", "p=" + format_key(p) + ";t=" + format_key(t), "lhs<=rhs", d.lhs, d.rhs,
                  cfg.tol("lp_decay") * std::max(1.0, d.rhs), "exact");
    }
}

std::size_t draw_state(const ProbVector& mu, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    acc += mu[i];
    if (u < acc) return i;
  }
  for (std::size_t i = mu.size(); i-- > 0;)
    if (mu[i] > 0.0) return i;
  return 0;
}

std::vector<double> sample_functionals(const FiniteModel& m, const ProbVector& start, std::size_t replicas,
                                       const RngStreamSpec& spec) {
  return parallel_map<double>(replicas, [&](std::size_t r) {
    RngStream rng(spec.child(r));
    const std::size_t x0 = draw_state(start, rng);
    return path_functional(sample_ctmc(m.q, x0, m.horizon, rng), m.f);
  });
}

void feynman_kac_mc(const FiniteModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  const auto F = sample_functionals(m, m.mu, cfg.replicas, {cfg.seed, 0, "finite/feynman-kac"});
  const double mean = mean_se(F).mean;
  const double nu_mean = m.nu.values().dot(integrated_semigroup(m.q, m.f, m.horizon));
  for (double lambda : m.lambdas) {
    std::vector<double> w(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) w[i] = std::exp(lambda * (F[i] - mean));
    const MeanSe s = mean_se(w);
    const double estimate = std::log(s.mean) + lambda * mean - lambda * nu_mean;
    const double se = s.se / s.mean;
    const double exact = feynman_kac_logmgf(m.q, m.f, m.horizon, lambda, m.mu, m.nu);
    out.near("feynman_kac_mc", "lambda=" + format_key(lambda), "mc_logmgf", estimate, exact, cfg.tol("mc_se") * se,
             "mc");
  }
}

void bennett(const FiniteModel& m, const ExperimentConfig& cfg, ResultSet& out) {
  const auto obs = ObservableSpec::finite(m.f, m.horizon);
  const C1C2 c = extract_c1_c2(m.q, coupled_difference(m.q, obs, PhiMode::UniformMajorant).phi0);
  out.info("bennett", "start=0", "c1", c.c1, "exact");
  out.info("bennett", "start=0", "c2", c.c2, "quadrature");
  if (c.degenerate) return;
  const auto F = sample_functionals(m, ProbVector::dirac(m.q.size(), 0), cfg.replicas, {cfg.seed, 0, "finite/bennett"});
  const double mean0 = integrated_semigroup(m.q, m.f, m.horizon)(0);
  for (double a : m.deviations) {
    const BennettResult b = bennett_deviation(a, m.horizon, c.c1, c.c2);
    std::size_t hits = 0;
    for (double v : F)
      if (v - mean0 >= a) ++hits;
    const double freq = static_cast<double>(hits) / static_cast<double>(F.size());
    const double bound = std::exp(b.optimized_exponent);
    const double se = std::sqrt(std::min(bound, 1.0) * (1.0 - std::min(bound, 1.0)) / static_cast<double>(F.size()));
    out.at_most("bennett", "a=" + format_key(a), "tail<=bound", freq, bound, cfg.tol("bennett_se") * se, "mc");
    out.at_most("bennett", "a=" + format_key(a), "optimized<=closed_form", b.optimized_exponent, b.exponent, 0.0,
                "exact");
  }
}

}  // namespace

ExperimentDef finite_experiment() {
  ExperimentDef def;
  def.name = "finite";
  def.title = "finite chain: sandwich bound, duality, coupling distance suite";
  def.tolerances = {{"sandwich", 1e-6},      {"duality", 1e-8},    {"rho_closed_form", 1e-10},
                    {"h_closed_form", 1e-6}, {"decay_rate", 1e-3}, {"lp_decay", 1e-12},
                    {"mc_se", 4.0},          {"bennett_se", 3.0}};
  def.validate = [](const ExperimentConfig& cfg) { (void)parse(cfg); };
  def.run = [](const ExperimentConfig& cfg, ResultSet& out) {
    const FiniteModel m = parse(cfg);
    sandwich(m, cfg, out);
    duality(m, cfg, out);
    contraction(m, cfg, out);
    feynman_kac_mc(m, cfg, out);
    bennett(m, cfg, out);
  };
  return def;
}

}  // namespace cbounds::cli
