#include "cbounds/bounds.hpp"

#include <cmath>
#include <limits>

#include "cbounds/finite_engine.hpp"
#include "cbounds/lattice_kernels.hpp"
#include "cbounds/quadrature.hpp"

namespace cbounds {

namespace {

Matrix differences(const Vector& g) {
  const Eigen::Index n = g.size();
  Matrix phi(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) phi(x, y) = g(x) - g(y);
  return phi;
}

// sup over s in [0, T] of |g(s)(x) - g(s)(y)|. The sampled maximum is raised by
// step * osc(f), which bounds the variation of g(s)(x) - g(s)(y) between samples.
Matrix majorant(const IntegratedSemigroup& table, const Vector& f, double rate) {
  const double horizon = table.horizon();
  const auto count = static_cast<std::size_t>(std::ceil(horizon * std::max(1.0, rate) / 0.0025));
  const double step = horizon / static_cast<double>(count);
  Matrix h = differences(table.g(horizon)).cwiseAbs();
  for (std::size_t i = 0; i < count; ++i)
    h = h.cwiseMax(differences(table.g(step * static_cast<double>(i))).cwiseAbs());
  const double slack = step * (f.maxCoeff() - f.minCoeff());
  h.array() += slack;
  h.diagonal().setZero();
  return h;
}

double log_c0_of(const Matrix& phi0, const ProbVector& mu, const ProbVector& nu) {
  // log sum_x mu(x) exp(nu(Phi_0(x, .))) with a max shift.
  const Vector e = phi0 * nu.values();
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < e.size(); ++x)
    if (mu.values()(x) > 0.0) m = std::max(m, e(x));
  double s = 0.0;
  for (Eigen::Index x = 0; x < e.size(); ++x)
    if (mu.values()(x) > 0.0) s += mu.values()(x) * std::exp(e(x) - m);
  return m + std::log(s);
}

void check_chain(const GeneratorMatrix& q, const ProbVector& mu, const ProbVector& nu) {
  require(mu.size() == q.size() && nu.size() == q.size(), ErrorCode::DimensionMismatch,
          "distributions must match the chain size");
}

}  // namespace

Matrix phi_matrix(const GeneratorMatrix& q, const ObservableSpec& obs, double t) {
  require(t >= 0.0, ErrorCode::InvalidArgument, "t must be nonnegative");
  const Vector& f = obs.finite_vector(q.size());
  const double remaining = std::max(obs.horizon - t, 0.0);
  if (remaining == 0.0) return Matrix::Zero(f.size(), f.size());
  return differences(integrated_semigroup(q, f, remaining));
}

CoupledDifference coupled_difference(const GeneratorMatrix& q, const ObservableSpec& obs, PhiMode mode) {
  CoupledDifference out;
  out.mode = mode;
  out.horizon = obs.horizon;
  if (mode == PhiMode::ExactTimeIntegral) {
    out.phi0 = phi_matrix(q, obs, 0.0);
  } else {
    const Vector& f = obs.finite_vector(q.size());
    const IntegratedSemigroup table(q, f, obs.horizon);
    out.phi0 = majorant(table, f, q.max_exit_rate());
  }
  return out;
}

SeriesResult series_sup(const GeneratorMatrix& q, const Matrix& phi, bool signed_phi, double tol) {
  require(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  require(static_cast<std::size_t>(phi.rows()) == q.size() && phi.rows() == phi.cols(), ErrorCode::DimensionMismatch,
          "phi must be n x n");
  const Eigen::Index n = phi.rows();
  const Matrix& rates = q.rates();
  double b = 0.0;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      if (x != y && rates(x, y) > 0.0) b = std::max(b, std::abs(phi(y, x)));
  const double rate = q.max_exit_rate();

  SeriesResult out;
  // Smallest K >= 2 with rate B^{K+1} e^B / (K+1)! <= tol.
  int k_max = 2;
  double cert = (b == 0.0 || rate == 0.0) ? 0.0 : rate * std::exp(3.0 * std::log(b) + b - std::lgamma(4.0));
  while (cert > tol && k_max < 2000) {
    ++k_max;
    cert *= b / (k_max + 1.0);
  }
  out.truncation_k = k_max;
  out.remainder = cert;

  Vector per_x = Vector::Zero(n);
  std::vector<double> term_sup(static_cast<std::size_t>(k_max + 1), -std::numeric_limits<double>::infinity());
  for (Eigen::Index x = 0; x < n; ++x) {
    std::vector<double> term(static_cast<std::size_t>(k_max + 1), 0.0);
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x || rates(x, y) <= 0.0) continue;
      const double v = signed_phi ? phi(y, x) : std::abs(phi(y, x));
      double pw = v;  // v^k / k!
      for (int k = 2; k <= k_max; ++k) {
        pw *= v / k;
        term[static_cast<std::size_t>(k)] += rates(x, y) * pw;
      }
    }
    for (int k = 2; k <= k_max; ++k) {
      per_x(x) += term[static_cast<std::size_t>(k)];
      term_sup[static_cast<std::size_t>(k)] = std::max(term_sup[static_cast<std::size_t>(k)], term[static_cast<std::size_t>(k)]);
    }
  }
  for (int k = 2; k <= k_max; ++k) out.terms.emplace_back(k, n > 0 ? term_sup[static_cast<std::size_t>(k)] : 0.0);
  out.sup_value = n > 0 ? per_x.maxCoeff() : 0.0;
  out.inf_value = n > 0 ? per_x.minCoeff() : 0.0;
  return out;
}

double BoundReport::log_c0() const { return std::log(c0); }

BoundReport exp_bound(const GeneratorMatrix& q, const ObservableSpec& obs, const ProbVector& mu, const ProbVector& nu,
                      PhiMode mode, double tol) {
  check_chain(q, mu, nu);
  const Vector& f = obs.finite_vector(q.size());
  const double horizon = obs.horizon;
  require(horizon > 0.0, ErrorCode::InvalidArgument, "horizon must be positive");

  const IntegratedSemigroup table(q, f, horizon);
  const Matrix phi0 = differences(table.g(horizon));
  const double log_c0 = log_c0_of(phi0, mu, nu);

  BoundReport report;
  report.c0 = std::exp(log_c0);

  constexpr double kSeriesTol = 1e-14;
  auto integrand = [&](double t) {
    const Matrix phi = differences(table.g(horizon - t));
    Vector v(2);
    v(0) = series_sup(q, phi, false, kSeriesTol).sup_value;
    v(1) = series_sup(q, phi, true, kSeriesTol).inf_value;
    return v;
  };

  // Scale for the relative quadrature tolerance.
  const Vector probe = integrand(0.0);
  const double scale = std::max({probe.cwiseAbs().maxCoeff() * horizon, integrand(0.5 * horizon).cwiseAbs().maxCoeff() * horizon, 1e-300});
  const VectorQuadrature quad = adaptive_simpson(integrand, 0.0, horizon, std::max(tol * scale, 1e-15));
  const double lower_integral = quad.value(1);

  double upper_integral = quad.value(0);
  SeriesResult s0 = series_sup(q, phi0, false, kSeriesTol);
  if (mode == PhiMode::UniformMajorant) {
    const Matrix h = majorant(table, f, q.max_exit_rate());
    s0 = series_sup(q, h, false, kSeriesTol);
    upper_integral = horizon * s0.sup_value;
  }
  report.series_terms = s0.terms;
  report.truncation_k = s0.truncation_k;
  report.remainder = horizon * kSeriesTol;
  report.upper = log_c0 + upper_integral + report.remainder + quad.error_estimate;
  report.lower = log_c0 + lower_integral - report.remainder - quad.error_estimate;
  return report;
}

BennettResult bennett_deviation(double a, double horizon, double c1, double c2) {
  require(a > 0.0 && horizon > 0.0 && c1 > 0.0 && c2 > 0.0, ErrorCode::NonPositiveParameter,
          "a, T, c1 and c2 must all be positive");
  BennettResult out;
  const double u = a / c2;
  const double v = horizon * c1;
  out.exponent = -0.5 * u * u / (v + u / 3.0);
  out.bound = std::exp(out.exponent);
  out.optimized_exponent = u - (v + u) * std::log1p(u / v);
  require(out.optimized_exponent <= out.exponent + 1e-12 * std::max(1.0, std::abs(out.exponent)),
          ErrorCode::InvariantBroken, "optimized exponent exceeds the closed-form exponent");
  return out;
}

C1C2 extract_c1_c2(const GeneratorMatrix& q, const Matrix& phi0) {
  const Eigen::Index n = phi0.rows();
  require(static_cast<std::size_t>(n) == q.size(), ErrorCode::DimensionMismatch, "phi must be n x n");
  const Matrix& rates = q.rates();
  C1C2 out;
  for (Eigen::Index x = 0; x < n; ++x) {
    double row = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x || rates(x, y) <= 0.0) continue;
      row += rates(x, y);
      out.c2 = std::max(out.c2, std::abs(phi0(y, x)));
    }
    out.c1 = std::max(out.c1, row);
  }
  out.degenerate = out.c2 == 0.0 || out.c1 == 0.0;
  for (int k = 2; k <= 20; ++k) {
    double sup = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) {
      double s = 0.0;
      for (Eigen::Index y = 0; y < n; ++y)
        if (y != x && rates(x, y) > 0.0) s += rates(x, y) * std::pow(std::abs(phi0(y, x)), k);
      sup = std::max(sup, s);
    }
    const double cap = out.c1 * std::pow(out.c2, k);
    require(sup <= cap * (1.0 + 1e-12) + 1e-300, ErrorCode::InvariantBroken, "c1 c2^k certificate failed");
    out.verified_up_to = k;
  }
  return out;
}

BoundReport lipschitz_exp_bound(const GeneratorMatrix& q, const CouplingTimeResult& h, double lipf, double horizon,
                                const ProbVector& mu, const ProbVector& nu) {
  check_chain(q, mu, nu);
  require(lipf >= 0.0 && horizon > 0.0, ErrorCode::InvalidArgument, "lipf must be >= 0 and T > 0");
  require(static_cast<std::size_t>(h.h.rows()) == q.size(), ErrorCode::DimensionMismatch, "h must be n x n");
  BoundReport report;
  const double log_c0 = log_c0_of(lipf * h.h, mu, nu);
  report.c0 = std::exp(log_c0);
  // c_k / k! sup_x A h^k = T sup_x A (lipf h)^k / k!.
  const SeriesResult s = series_sup(q, lipf * h.h, false, 1e-14);
  report.series_terms = s.terms;
  for (auto& [k, v] : report.series_terms) v *= horizon;
  report.truncation_k = s.truncation_k;
  report.remainder = horizon * s.remainder;
  report.upper = log_c0 + horizon * s.sup_value + report.remainder;
  report.lower = -std::numeric_limits<double>::infinity();
  return report;
}

double ips_bound(double norm_G_p2, double norm_delta_f_p, const std::function<double(int)>& c_k, double horizon,
                 std::optional<IpsExtras> extras) {
  require(norm_G_p2 >= 0.0 && norm_delta_f_p >= 0.0 && horizon >= 0.0, ErrorCode::InvalidArgument,
          "norms and horizon must be nonnegative");
  const double g = norm_G_p2 * norm_delta_f_p;
  double sum = 0.0;
  if (g > 0.0) {
    // term_k = c_k g^k / k!, accumulated in log space.
    bool converged = false;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 2; k <= 4000; ++k) {
      const double ck = c_k(k);
      require(ck >= 0.0 && std::isfinite(ck), ErrorCode::DivergentSeries, "c_k must be finite and nonnegative");
      const double term = ck == 0.0 ? 0.0 : std::exp(std::log(ck) + k * std::log(g) - std::lgamma(k + 1.0));
      require(std::isfinite(term), ErrorCode::DivergentSeries, "series term overflowed");
      sum += term;
      if (k > 4 && term <= 1e-17 * sum && term <= prev) {
        converged = true;
        break;
      }
      prev = term;
    }
    require(converged, ErrorCode::DivergentSeries, "c_k grows too fast for the series to converge");
  }
  double out = horizon * sum;
  if (extras) out += extras->norm_G_1 * extras->triple_norm_f;
  return out;
}

IpsExclusionReport ips_exclusion_bound(int d, double triple_norm_f, double horizon, double tol) {
  const NormG g = norm_G_1to2(d, tol);
  IpsExclusionReport out;
  out.norm_G_1to2 = g.norm;
  out.norm_G_1to2_squared = g.squared;
  out.self_convergence_change = g.doubling_change;
  out.log_bound = ips_bound(g.norm, triple_norm_f, [](int k) { return std::ldexp(1.0, k); }, horizon);
  return out;
}

double spin_flip_G_norm(double epsilon, double m) {
  require(m >= 0.0 && epsilon > m, ErrorCode::NonPositiveParameter, "requires 0 <= M < epsilon");
  return 1.0 / (epsilon - m);
}

}  // namespace cbounds
