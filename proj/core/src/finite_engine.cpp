#include "cbounds/finite_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace cbounds {

namespace {

constexpr double kPoissonTail = 1e-14;

// Poisson(m) weights on [lo, hi], renormalized after dropping at most 1e-14 of mass.
struct PoissonWindow {
  std::size_t lo = 0;
  std::vector<double> w;
};

PoissonWindow poisson_window(double m) {
  PoissonWindow out;
  if (m <= 0.0) {
    out.w = {1.0};
    return out;
  }
  const auto mode = static_cast<std::size_t>(std::floor(m));
  auto logw = [m](std::size_t k) { return -m + static_cast<double>(k) * std::log(m) - std::lgamma(static_cast<double>(k) + 1.0); };

  std::vector<double> right;
  for (std::size_t k = mode;; ++k) {
    const double wk = std::exp(logw(k));
    right.push_back(wk);
    const double r = m / static_cast<double>(k + 2);
    if (r < 1.0 && wk * r / (1.0 - r) <= 0.5 * kPoissonTail) break;
  }
  std::vector<double> left;
  std::size_t lo = mode;
  while (lo > 0) {
    const double wk = std::exp(logw(lo - 1));
    const double r = static_cast<double>(lo - 1) / m;
    if (r < 1.0 && wk / (1.0 - r) <= 0.5 * kPoissonTail) break;
    left.push_back(wk);
    --lo;
  }
  out.lo = lo;
  out.w.assign(left.rbegin(), left.rend());
  out.w.insert(out.w.end(), right.begin(), right.end());
  double total = 0.0;
  for (double x : out.w) total += x;
  for (double& x : out.w) x /= total;
  return out;
}

Matrix uniformized_kernel(const GeneratorMatrix& q, double lambda) {
  Matrix p = q.rates() / lambda;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    p(i, i) = 0.0;
    p(i, i) = 1.0 - p.row(i).sum();
  }
  return p;
}

}  // namespace

Vector semigroup_apply(const GeneratorMatrix& q, double t, const Vector& f) {
  require(t >= 0.0, ErrorCode::InvalidArgument, "semigroup time must be nonnegative");
  require(static_cast<std::size_t>(f.size()) == q.size(), ErrorCode::DimensionMismatch, "f length");
  const double lambda = q.max_exit_rate();
  if (t == 0.0 || lambda == 0.0 || f.size() == 0) return f;
  // Shift by f(0) so constants are reproduced exactly.
  const double shift = f(0);
  Vector v = f.array() - shift;
  const Matrix p = uniformized_kernel(q, lambda);
  const PoissonWindow win = poisson_window(lambda * t);
  Vector acc = Vector::Zero(f.size());
  for (std::size_t k = 0; k < win.lo + win.w.size(); ++k) {
    if (k >= win.lo) acc += win.w[k - win.lo] * v;
    if (k + 1 < win.lo + win.w.size()) v = p * v;
  }
  return acc.array() + shift;
}

Vector semigroup_apply_left(const GeneratorMatrix& q, double t, const Vector& mu) {
  require(t >= 0.0, ErrorCode::InvalidArgument, "semigroup time must be nonnegative");
  require(static_cast<std::size_t>(mu.size()) == q.size(), ErrorCode::DimensionMismatch, "mu length");
  const double lambda = q.max_exit_rate();
  if (t == 0.0 || lambda == 0.0) return mu;
  const Matrix pt = uniformized_kernel(q, lambda).transpose();
  const PoissonWindow win = poisson_window(lambda * t);
  Vector v = mu;
  Vector acc = Vector::Zero(mu.size());
  for (std::size_t k = 0; k < win.lo + win.w.size(); ++k) {
    if (k >= win.lo) acc += win.w[k - win.lo] * v;
    if (k + 1 < win.lo + win.w.size()) v = pt * v;
  }
  return acc;
}

Matrix transition_matrix(const GeneratorMatrix& q, double t) {
  require(t >= 0.0, ErrorCode::InvalidArgument, "semigroup time must be nonnegative");
  const auto n = static_cast<Eigen::Index>(q.size());
  const double lambda = q.max_exit_rate();
  if (t == 0.0 || lambda == 0.0) return Matrix::Identity(n, n);
  const Matrix p = uniformized_kernel(q, lambda);
  const PoissonWindow win = poisson_window(lambda * t);
  Matrix power = Matrix::Identity(n, n);
  Matrix acc = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < win.lo + win.w.size(); ++k) {
    if (k >= win.lo) acc += win.w[k - win.lo] * power;
    if (k + 1 < win.lo + win.w.size()) power = power * p;
  }
  for (Eigen::Index i = 0; i < n; ++i) acc.row(i) /= acc.row(i).sum();
  return acc;
}

std::vector<Matrix> transition_matrices(const GeneratorMatrix& q, const std::vector<double>& grid) {
  std::vector<Matrix> out;
  out.reserve(grid.size());
  const auto n = static_cast<Eigen::Index>(q.size());
  Matrix current = Matrix::Identity(n, n);
  double t_prev = 0.0;
  for (double t : grid) {
    require(t >= t_prev, ErrorCode::InvalidArgument, "time grid must be increasing and nonnegative");
    if (t > t_prev) {
      current = current * transition_matrix(q, t - t_prev);
      for (Eigen::Index i = 0; i < n; ++i) current.row(i) /= current.row(i).sum();
    }
    out.push_back(current);
    t_prev = t;
  }
  return out;
}

Matrix matrix_exp(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "matrix_exp needs a square matrix");
  require(m.allFinite(), ErrorCode::Overflow, "non-finite input to matrix_exp");
  Matrix e = m.exp();
  require(e.allFinite(), ErrorCode::Overflow, "matrix exponential overflowed");
  return e;
}

Vector integrated_semigroup(const GeneratorMatrix& q, const Vector& f, double horizon) {
  require(horizon >= 0.0, ErrorCode::InvalidArgument, "horizon must be nonnegative");
  require(static_cast<std::size_t>(f.size()) == q.size(), ErrorCode::DimensionMismatch, "f length");
  using State = std::vector<double>;
  const Matrix& qm = q.rates();
  const auto n = f.size();
  State g(static_cast<std::size_t>(n), 0.0);
  if (horizon == 0.0) return Vector::Zero(n);
  auto rhs = [&](const State& x, State& dx, double) {
    Eigen::Map<const Vector> xv(x.data(), n);
    Eigen::Map<Vector> dv(dx.data(), n);
    dv = f + qm * xv;
  };
  namespace ode = boost::numeric::odeint;
  const double h0 = std::min(horizon, 0.01 / std::max(1.0, q.max_exit_rate()));
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-12, 1e-12), rhs, g, 0.0,
                          horizon, h0);
  return Eigen::Map<Vector>(g.data(), n);
}

IntegratedSemigroup::IntegratedSemigroup(const GeneratorMatrix& q, const Vector& f, double horizon)
    : q_(q.rates()), f_(f), horizon_(horizon) {
  require(horizon > 0.0, ErrorCode::InvalidArgument, "horizon must be positive");
  require(static_cast<std::size_t>(f.size()) == q.size(), ErrorCode::DimensionMismatch, "f length");
  const double h_max = 0.01 / std::max(1.0, q.max_exit_rate());
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / h_max));
  step_ = horizon / static_cast<double>(steps);

  const auto n = f.size();
  using State = std::vector<double>;
  State state(static_cast<std::size_t>(2 * n), 0.0);
  auto rhs = [&](const State& x, State& dx, double) {
    Eigen::Map<const Vector> gv(x.data(), n);
    Eigen::Map<Vector>(dx.data(), n) = f_ + q_ * gv;
    Eigen::Map<Vector>(dx.data() + n, n) = k_slope(gv);
  };
  std::vector<double> times(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) times[i] = step_ * static_cast<double>(i);
  times.back() = horizon;
  auto observer = [&](const State& x, double) {
    Eigen::Map<const Vector> gv(x.data(), n);
    g_.emplace_back(gv);
    dg_.emplace_back(f_ + q_ * gv);
    k_.emplace_back(Eigen::Map<const Vector>(x.data() + n, n));
    dk_.emplace_back(k_slope(gv));
  };
  namespace ode = boost::numeric::odeint;
  ode::integrate_times(ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>()), rhs, state,
                       times.begin(), times.end(), step_, observer);
}

Vector IntegratedSemigroup::k_slope(const Vector& g) const {
  const auto n = g.size();
  Vector out = Vector::Zero(n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      if (y != x && q_(x, y) > 0.0) {
        const double d = g(y) - g(x);
        out(x) += q_(x, y) * d * d;
      }
  return out;
}

Vector IntegratedSemigroup::interpolate(const std::vector<Vector>& values, const std::vector<Vector>& slopes,
                                        double s) const {
  s = std::clamp(s, 0.0, horizon_);
  const std::size_t last = values.size() - 1;
  auto i = static_cast<std::size_t>(s / step_);
  if (i >= last) return values[last];
  const double t0 = step_ * static_cast<double>(i);
  const double h = (i + 1 == last) ? horizon_ - t0 : step_;
  const double u = (s - t0) / h;
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * values[i] + (u3 - 2 * u2 + u) * h * slopes[i] + (-2 * u3 + 3 * u2) * values[i + 1] +
         (u3 - u2) * h * slopes[i + 1];
}

Vector IntegratedSemigroup::g(double s) const { return interpolate(g_, dg_, s); }
Vector IntegratedSemigroup::k(double s) const { return interpolate(k_, dk_, s); }

double feynman_kac_log_expectation(const GeneratorMatrix& q, const Vector& f, double horizon, double lambda,
                                   const ProbVector& mu) {
  require(horizon > 0.0, ErrorCode::InvalidArgument, "horizon must be positive");
  require(static_cast<std::size_t>(f.size()) == q.size() && mu.size() == q.size(), ErrorCode::DimensionMismatch,
          "f and mu must match the chain size");
  if (lambda == 0.0 || f.size() == 0) return 0.0;
  // Shift the potential so that every row sum of the exponent is <= 0.
  const Vector lf = lambda * f;
  const double shift = lf.maxCoeff();
  Matrix m = q.rates();
  m.diagonal() += (lf.array() - shift).matrix();
  const Matrix e = matrix_exp(horizon * m);
  const double inner = mu.values().dot(e.rowwise().sum());
  require(inner > 0.0 && std::isfinite(inner), ErrorCode::Overflow, "Feynman-Kac expectation under/overflow");
  return horizon * shift + std::log(inner);
}

double feynman_kac_logmgf(const GeneratorMatrix& q, const Vector& f, double horizon, double lambda,
                          const ProbVector& mu, const ProbVector& nu) {
  require(nu.size() == q.size(), ErrorCode::DimensionMismatch, "nu must match the chain size");
  if (lambda == 0.0) return 0.0;
  const double mean_nu = nu.values().dot(integrated_semigroup(q, f, horizon));
  return feynman_kac_log_expectation(q, f, horizon, lambda, mu) - lambda * mean_nu;
}

std::size_t closed_class_count(const GeneratorMatrix& q) {
  const std::size_t n = q.size();
  // reach(i, j): j reachable from i.
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    reach[i][i] = 1;
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && q(i, j) > 0.0) reach[i][j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  // i is in a closed class iff everything it reaches reaches back; count class representatives.
  std::size_t count = 0;
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    bool closed = true;
    for (std::size_t j = 0; j < n && closed; ++j)
      if (reach[i][j] && !reach[j][i]) closed = false;
    if (!closed) continue;
    ++count;
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j]) seen[j] = 1;
  }
  return count;
}

ProbVector stationary_distribution(const GeneratorMatrix& q) {
  const auto n = static_cast<Eigen::Index>(q.size());
  require(n > 0, ErrorCode::InvalidArgument, "empty chain");
  require(closed_class_count(q) == 1, ErrorCode::Reducible, "stationary law is not unique");
  Matrix a(n + 1, n);
  a.topRows(n) = q.rates().transpose();
  a.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b(n) = 1.0;
  Vector pi = a.colPivHouseholderQr().solve(b);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  // One step of iterative refinement keeps the residual near machine precision.
  const Vector r = b - a * pi;
  pi += a.colPivHouseholderQr().solve(r);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return ProbVector(pi);
}

CtmcPath sample_ctmc(const GeneratorMatrix& q, std::size_t x0, double horizon, const RngStreamSpec& spec) {
  RngStream rng(spec);
  return sample_ctmc(q, x0, horizon, rng);
}

CtmcPath sample_ctmc(const GeneratorMatrix& q, std::size_t x0, double horizon, RngStream& rng) {
  require(horizon > 0.0, ErrorCode::InvalidArgument, "horizon must be positive");
  require(x0 < q.size(), ErrorCode::InvalidArgument, "initial state out of range");
  CtmcPath path;
  path.horizon = horizon;
  path.states.push_back(x0);
  std::size_t x = x0;
  double t = 0.0;
  for (;;) {
    const double rate = q.exit_rate(x);
    if (rate <= 0.0) break;
    t += rng.exponential(rate);
    if (t >= horizon) break;
    double u = rng.uniform() * rate;
    std::size_t next = x;
    for (std::size_t y = 0; y < q.size(); ++y) {
      if (y == x) continue;
      const double r = q(x, y);
      if (r <= 0.0) continue;
      next = y;
      if (u < r) break;
      u -= r;
    }
    path.jump_times.push_back(t);
    path.states.push_back(next);
    x = next;
  }
  return path;
}

double path_functional(const CtmcPath& path, const Vector& f) {
  double sum = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
    sum += f(static_cast<Eigen::Index>(path.states[k])) * (path.jump_times[k] - prev);
    prev = path.jump_times[k];
  }
  sum += f(static_cast<Eigen::Index>(path.states.back())) * (path.horizon - prev);
  return sum;
}

}  // namespace cbounds
