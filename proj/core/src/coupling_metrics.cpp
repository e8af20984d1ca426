#include "cbounds/coupling_metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cbounds/finite_engine.hpp"
#include "cbounds/quadrature.hpp"
#include "cbounds/transport.hpp"

namespace cbounds {

namespace {

constexpr double kGridTol = 1e-9;

Matrix closure_of(const FiniteMetric& rho) {
  return rho.mode() == MetricMode::Metric ? rho.distances() : rho.shortest_path_closure();
}

Matrix rho_t_matrix_with(const Matrix& p, const Matrix& cost, const Matrix& closure) {
  const Eigen::Index n = p.rows();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const Vector mu = p.row(x).transpose();
      const Vector nu = p.row(y).transpose();
      const double c = solve_transport_raw(mu, nu, cost, closure).plan.cost;
      out(x, y) = c;
      out(y, x) = c;
    }
  return out;
}

// Upper triangle packed as a vector, the integrand of the h quadrature.
Vector pack(const Matrix& m) {
  const Eigen::Index n = m.rows();
  Vector v(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x + 1; y < n; ++y) v(k++) = m(x, y);
  return v;
}

Matrix unpack(const Vector& v, Eigen::Index n) {
  Matrix m = Matrix::Zero(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x + 1; y < n; ++y) {
      m(x, y) = v(k);
      m(y, x) = v(k);
      ++k;
    }
  return m;
}

std::string witness(const char* what, Eigen::Index x, Eigen::Index y, double t) {
  std::ostringstream os;
  os << what << " at (x=" << x << ", y=" << y << ", t=" << t << ")";
  return os.str();
}

}  // namespace

std::vector<double> default_time_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 6 * 64; ++k) grid.push_back(std::pow(10.0, -3.0 + k / 64.0));
  return grid;
}

double rho_t(const GeneratorMatrix& q, const FiniteMetric& rho, std::size_t x, std::size_t y, double t) {
  require(q.size() == rho.size(), ErrorCode::DimensionMismatch, "metric and generator sizes differ");
  require(x < q.size() && y < q.size(), ErrorCode::InvalidArgument, "state out of range");
  if (x == y) return 0.0;
  const Matrix p = transition_matrix(q, t);
  const auto xi = static_cast<Eigen::Index>(x);
  const auto yi = static_cast<Eigen::Index>(y);
  return solve_transport_raw(p.row(xi).transpose(), p.row(yi).transpose(), rho.distances(), closure_of(rho))
      .plan.cost;
}

Matrix rho_t_matrix(const Matrix& p, const FiniteMetric& rho) {
  return rho_t_matrix_with(p, rho.distances(), closure_of(rho));
}

Matrix rho_t_matrix(const GeneratorMatrix& q, const FiniteMetric& rho, double t) {
  require(q.size() == rho.size(), ErrorCode::DimensionMismatch, "metric and generator sizes differ");
  return rho_t_matrix(transition_matrix(q, t), rho);
}

double lip_ratio(const Matrix& rt, const FiniteMetric& rho) {
  double best = 0.0;
  for (Eigen::Index x = 0; x < rt.rows(); ++x)
    for (Eigen::Index y = x + 1; y < rt.rows(); ++y) {
      const double r = rho(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      if (r > 0.0) best = std::max(best, rt(x, y) / r);
    }
  return best;
}

double lip_norm(const GeneratorMatrix& q, const FiniteMetric& rho, double t) {
  require(rho.mode() == MetricMode::Metric, ErrorCode::SemimetricOnly, "Lipschitz norm needs a metric");
  return lip_ratio(rho_t_matrix(q, rho, t), rho);
}

CouplingTimeResult coupling_time_h(const GeneratorMatrix& q, const FiniteMetric& rho, double tol) {
  require(q.size() == rho.size(), ErrorCode::DimensionMismatch, "metric and generator sizes differ");
  require(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  const auto n = static_cast<Eigen::Index>(q.size());
  CouplingTimeResult out;
  out.h = Matrix::Zero(n, n);
  if (n < 2) return out;

  const Matrix cost = rho.distances();
  const Matrix closure = closure_of(rho);

  // Panel width: first grid time where rho_{t+s} <= L_s rho_t holds with L_s <= 1/2.
  const std::vector<double> grid = default_time_grid();
  const std::vector<Matrix> kernels = transition_matrices(q, grid);
  double delta = -1.0;
  double contraction = 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double l = lip_ratio(rho_t_matrix_with(kernels[i], cost, closure), rho);
    if (l <= 0.5) {
      delta = grid[i];
      contraction = l;
      break;
    }
  }
  if (delta < 0.0) fail(ErrorCode::NoDecayDetected, "rho_t does not contract by 1/2 before t = 1e3");
  out.t_cut = delta;

  auto integrand = [&](double t) { return pack(rho_t_matrix_with(transition_matrix(q, t), cost, closure)); };

  // Gluing optimal couplings gives rho_{t + delta} <= L rho_t, so the integral
  // beyond panel k is at most L / (1 - L) times the integral over panel k.
  const double tail_factor = contraction / (1.0 - contraction);
  Vector total = Vector::Zero(n * (n - 1) / 2);
  double panel_tol = 0.25 * tol;
  out.grid.push_back(0.0);
  for (int k = 0; k < 100000; ++k) {
    const double a = k * delta;
    const double b = (k + 1) * delta;
    const VectorQuadrature panel = adaptive_simpson(integrand, a, b, panel_tol);
    total += panel.value;
    out.grid.push_back(b);
    const double tail = tail_factor * panel.value.cwiseMax(0.0).maxCoeff();
    if (tail <= 0.5 * tol) {
      out.tail_bound = tail;
      break;
    }
    panel_tol *= 0.5;
    require(k + 1 < 100000, ErrorCode::NoDecayDetected, "h quadrature did not converge");
  }
  total.array() += out.tail_bound;
  out.h = unpack(total, n);
  return out;
}

ContractionReport contraction_suite(const GeneratorMatrix& q, const FiniteMetric& rho, double alpha,
                                    const std::vector<double>& grid) {
  require(rho.mode() == MetricMode::Metric, ErrorCode::SemimetricOnly, "contraction suite needs a metric");
  require(alpha > 1.0, ErrorCode::InvalidArgument, "alpha must exceed 1");
  require(q.size() == rho.size(), ErrorCode::DimensionMismatch, "metric and generator sizes differ");
  const auto n = static_cast<Eigen::Index>(q.size());

  ContractionReport report;
  const std::vector<Matrix> kernels = transition_matrices(q, grid);
  std::vector<Matrix> rhos;
  rhos.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rhos.push_back(rho_t_matrix(kernels[i], rho));
    report.lip_norms.emplace_back(grid[i], lip_ratio(rhos.back(), rho));
  }

  report.is_contraction = true;
  for (const auto& [t, l] : report.lip_norms)
    if (l > 1.0 + kGridTol) report.is_contraction = false;
  if (!report.is_contraction) return report;

  // (ii) rho_t is non-increasing in t for every pair.
  for (std::size_t i = 1; i < grid.size(); ++i)
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = x + 1; y < n; ++y)
        if (rhos[i](x, y) > rhos[i - 1](x, y) + kGridTol * std::max(1.0, rho.diameter()))
          throw ContractionViolated(static_cast<std::size_t>(x), static_cast<std::size_t>(y), grid[i],
                                    witness("rho_t increased", x, y, grid[i]));

  report.h = coupling_time_h(q, rho);
  const Matrix& h = report.h.h;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const double r = rho(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      if (r > 0.0) report.M = std::max(report.M, h(x, y) / r);
    }

  // (iii) h <= M rho implies ||S_t|| <= 1/alpha for t >= M alpha.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < report.M * alpha) continue;
    if (report.lip_norms[i].second > 1.0 / alpha + kGridTol) {
      Eigen::Index wx = 0, wy = 1;
      double worst = -1.0;
      for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = x + 1; y < n; ++y) {
          const double r = rho(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
          if (r > 0.0 && rhos[i](x, y) / r > worst) {
            worst = rhos[i](x, y) / r;
            wx = x;
            wy = y;
          }
        }
      throw ContractionViolated(static_cast<std::size_t>(wx), static_cast<std::size_t>(wy), grid[i],
                                witness("||S_t||_Lip > 1/alpha beyond M alpha", wx, wy, grid[i]));
    }
  }

  // (iv) ||S_T|| <= 1/alpha implies h <= alpha T / (alpha - 1) rho.
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (report.lip_norms[i].second <= 1.0 / alpha) {
      report.t_alpha = grid[i];
      break;
    }
  if (report.t_alpha > 0.0) {
    const double factor = alpha * report.t_alpha / (alpha - 1.0);
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = x + 1; y < n; ++y) {
        const double r = rho(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
        if (h(x, y) > factor * r + 2.0 * report.h.tail_bound + 1e-8)
          throw ContractionViolated(static_cast<std::size_t>(x), static_cast<std::size_t>(y), report.t_alpha,
                                    witness("h exceeds alpha T / (alpha - 1) rho", x, y, report.t_alpha));
      }
  }

  // (v) decay rate from the last two well-resolved grid points about a factor 2 apart in t.
  std::size_t last = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (report.lip_norms[i].second >= 1e-8) last = i;
  std::size_t first = last;
  while (first > 0 && grid[first] > 0.5 * grid[last]) --first;
  if (last > first && report.lip_norms[last].second > 0.0) {
    report.decay_rate = (std::log(report.lip_norms[last].second) - std::log(report.lip_norms[first].second)) /
                        (grid[last] - grid[first]);
  }
  report.decay_consistent = report.M > 0.0 && report.decay_rate <= -1.0 / report.M + 1e-3;
  return report;
}

double lipschitz_constant(const Vector& f, const FiniteMetric& rho) {
  double best = 0.0;
  for (std::size_t x = 0; x < rho.size(); ++x)
    for (std::size_t y = x + 1; y < rho.size(); ++y) {
      const double df = std::abs(f(static_cast<Eigen::Index>(x)) - f(static_cast<Eigen::Index>(y)));
      if (df == 0.0) continue;
      if (rho(x, y) == 0.0) return std::numeric_limits<double>::infinity();
      best = std::max(best, df / rho(x, y));
    }
  return best;
}

LpDecay lp_decay_check(const GeneratorMatrix& q, const FiniteMetric& rho, const Vector& f, double p, double t) {
  require(p >= 1.0, ErrorCode::InvalidArgument, "p must be >= 1");
  require(static_cast<std::size_t>(f.size()) == q.size() && rho.size() == q.size(), ErrorCode::DimensionMismatch,
          "f, metric and generator sizes differ");
  const ProbVector mu = stationary_distribution(q);
  const Vector& m = mu.values();
  const Vector stf = semigroup_apply(q, t, f);
  const double mean = m.dot(f);
  LpDecay out;
  for (Eigen::Index x = 0; x < f.size(); ++x) out.lhs += m(x) * std::pow(std::abs(stf(x) - mean), p);
  out.lhs = std::pow(out.lhs, 1.0 / p);

  const double lip = lipschitz_constant(f, rho);
  if (lip == 0.0) return out;
  const Matrix rt = rho_t_matrix(q, rho, t);
  const Vector inner = rt * m;
  double acc = 0.0;
  for (Eigen::Index x = 0; x < f.size(); ++x) acc += m(x) * std::pow(inner(x), p);
  out.rhs = lip * std::pow(acc, 1.0 / p);
  return out;
}

}  // namespace cbounds
