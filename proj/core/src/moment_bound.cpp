#include <algorithm>
#include <cmath>

#include "cbounds/bounds.hpp"
#include "cbounds/finite_engine.hpp"
#include "cbounds/parallel.hpp"
#include "cbounds/rng.hpp"

namespace cbounds {

double default_rosenthal_constant(double p) { return 2.0 * p / std::log(std::max(p, 2.72)); }

namespace {

struct ReplicaMoments {
  double qv = 0.0;
  double jump = 0.0;
  double dev = 0.0;
};

// Mean and variance of a stratified estimator: strata weights w, per-replica values grouped by stratum.
struct Stratified {
  double mean = 0.0;
  double var = 0.0;
};

Stratified stratified(const std::vector<double>& values, const std::vector<std::size_t>& stratum,
                      const Vector& weights) {
  const auto n = static_cast<std::size_t>(weights.size());
  std::vector<double> sum(n, 0.0), sum2(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t r = 0; r < values.size(); ++r) {
    sum[stratum[r]] += values[r];
    sum2[stratum[r]] += values[r] * values[r];
    ++count[stratum[r]];
  }
  Stratified out;
  for (std::size_t x = 0; x < n; ++x) {
    if (count[x] == 0) continue;
    const double w = weights(static_cast<Eigen::Index>(x));
    const double c = static_cast<double>(count[x]);
    const double m = sum[x] / c;
    const double v = count[x] > 1 ? std::max(0.0, (sum2[x] - c * m * m) / (c - 1.0)) : 0.0;
    out.mean += w * m;
    out.var += w * w * v / c;
  }
  return out;
}

// (E Y)^{1/p} and its delta-method standard error.
std::pair<double, double> pth_root(const Stratified& s, double p) {
  if (s.mean <= 0.0) return {0.0, std::pow(std::sqrt(s.var), 1.0 / p)};
  const double root = std::pow(s.mean, 1.0 / p);
  return {root, root / (p * s.mean) * std::sqrt(s.var)};
}

}  // namespace

MomentBoundReport moment_bound_rhs(const GeneratorMatrix& q, const ObservableSpec& obs, const ProbVector& mu,
                                   const ProbVector& nu, double p, double C_p, std::size_t n_replicas,
                                   const RngStreamSpec& rng) {
  require(p >= 2.0, ErrorCode::InvalidArgument, "p must be >= 2");
  require(n_replicas >= 2, ErrorCode::InvalidArgument, "need at least two replicas");
  require(mu.size() == q.size() && nu.size() == q.size(), ErrorCode::DimensionMismatch,
          "distributions must match the chain size");
  const Vector& f = obs.finite_vector(q.size());
  const double horizon = obs.horizon;
  const IntegratedSemigroup table(q, f, horizon);
  const Vector g_full = table.g(horizon);
  const double mean_nu = nu.values().dot(g_full);

  MomentBoundReport out;
  out.p = p;
  out.C_p = C_p;

  // Exact initial term: (sum_x mu(x) |nu(Phi_0(x, .))|^p)^{1/p}, nu(Phi_0(x, .)) = g(x) - nu(g).
  double init = 0.0;
  for (Eigen::Index x = 0; x < f.size(); ++x) init += mu.values()(x) * std::pow(std::abs(g_full(x) - mean_nu), p);
  out.term_initial = std::pow(init, 1.0 / p);

  // Proportional allocation of replicas to initial states.
  const auto n = static_cast<std::size_t>(f.size());
  std::vector<std::size_t> stratum;
  stratum.reserve(n_replicas);
  std::vector<std::size_t> support;
  for (std::size_t x = 0; x < n; ++x)
    if (mu[x] > 0.0) support.push_back(x);
  const std::size_t per_min = std::max<std::size_t>(2, n_replicas / (20 * support.size()));
  for (std::size_t x : support) {
    const auto share = std::max(per_min, static_cast<std::size_t>(std::llround(mu[x] * static_cast<double>(n_replicas))));
    stratum.insert(stratum.end(), share, x);
  }

  const std::vector<ReplicaMoments> reps = parallel_map<ReplicaMoments>(stratum.size(), [&](std::size_t r) {
    RngStream stream(rng.child(r));
    const CtmcPath path = sample_ctmc(q, stratum[r], horizon, stream);
    ReplicaMoments m;
    double prev = 0.0;
    double jump_sup = 0.0;
    for (std::size_t k = 0; k <= path.jump_times.size(); ++k) {
      const double end = k < path.jump_times.size() ? path.jump_times[k] : horizon;
      const auto x = static_cast<Eigen::Index>(path.states[k]);
      // int_prev^end A Phi_t^2(., x)(x) dt = K_x(T - prev) - K_x(T - end).
      m.qv += table.k(horizon - prev)(x) - table.k(horizon - end)(x);
      if (k < path.jump_times.size()) {
        const Vector g = table.g(horizon - end);
        const auto y = static_cast<Eigen::Index>(path.states[k + 1]);
        jump_sup = std::max(jump_sup, std::abs(g(y) - g(x)));
      }
      prev = end;
    }
    m.qv = std::pow(std::max(m.qv, 0.0), 0.5 * p);
    m.jump = std::pow(jump_sup, p);
    m.dev = std::pow(std::abs(path_functional(path, f) - mean_nu), p);
    return m;
  });

  std::vector<double> qv(reps.size()), jump(reps.size()), dev(reps.size());
  for (std::size_t r = 0; r < reps.size(); ++r) {
    qv[r] = reps[r].qv;
    jump[r] = reps[r].jump;
    dev[r] = reps[r].dev;
  }
  std::tie(out.term_qv, out.term_qv_se) = pth_root(stratified(qv, stratum, mu.values()), p);
  std::tie(out.term_jump, out.term_jump_se) = pth_root(stratified(jump, stratum, mu.values()), p);
  std::tie(out.lhs_estimate, out.lhs_se) = pth_root(stratified(dev, stratum, mu.values()), p);
  out.rhs = C_p * (out.term_qv + out.term_jump) + out.term_initial;
  return out;
}

}  // namespace cbounds
