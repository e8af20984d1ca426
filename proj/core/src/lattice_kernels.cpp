#include "cbounds/lattice_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "cbounds/mc_harness.hpp"
#include "cbounds/quadrature.hpp"

namespace cbounds {

namespace {

// Terms t_j = e^{-s} (s/2)^j / (a! b!), a = (j+m)/2, b = (j-m)/2, over j = |m| mod 2.
// t_{j+2} / t_j = s^2 / ((j+2)^2 - m^2) is decreasing in j, so the sequence is
// unimodal and both tails are dominated by geometric series.
double kernel_1d_impl(double s, long m, double tol) {
  m = std::abs(m);
  if (s == 0.0) return m == 0 ? 1.0 : 0.0;
  const double md = static_cast<double>(m);
  // Extended precision: the exponent is O(s) while the result is O(1/sqrt(s)).
  auto log_term = [&](long j) {
    const long double a = 0.5L * static_cast<long double>(j + m);
    const long double b = 0.5L * static_cast<long double>(j - m);
    const long double ls = s;
    return -ls + static_cast<long double>(j) * std::log(0.5L * ls) - std::lgamma(a + 1.0L) - std::lgamma(b + 1.0L);
  };
  long j0 = static_cast<long>(std::floor(std::sqrt(s * s + md * md))) - 2;
  j0 = std::max(j0, m);
  if ((j0 - m) % 2 != 0) ++j0;
  const double t0 = static_cast<double>(std::exp(log_term(j0)));
  if (t0 == 0.0) return 0.0;
  double sum = t0;

  double t = t0;
  for (long j = j0;; j += 2) {
    const double jn = static_cast<double>(j + 2);
    const double r = s * s / (jn * jn - md * md);
    t *= r;
    sum += t;
    const double rn = s * s / ((jn + 2.0) * (jn + 2.0) - md * md);
    if (rn < 1.0 && t * rn / (1.0 - rn) <= std::max(0.5 * tol, 1e-18 * sum)) break;
  }
  t = t0;
  for (long j = j0; j - 2 >= m; j -= 2) {
    const double jd = static_cast<double>(j);
    const double r = (jd * jd - md * md) / (s * s);
    t *= r;
    sum += t;
    const double jp = jd - 2.0;
    const double rn = (jp * jp - md * md) / (s * s);
    if (rn < 1.0 && t * rn / (1.0 - rn) <= std::max(0.5 * tol, 1e-18 * sum)) break;
  }
  return sum;
}

double p00(int d, double s) { return std::pow(kernel_1d_impl(s / d, 0, 0.0), d); }

using Rule = boost::math::quadrature::gauss<double, 24>;

// Panels [0, h], [h, 2h], ... up to `a`, then geometric growth with ratio `r`.
double panel_integral(const std::function<double(double)>& fn, double lo, double hi, double h, double r) {
  if (hi <= lo) return 0.0;
  double sum = 0.0;
  double x = lo;
  while (x < hi) {
    const double step = std::max(h, x * (r - 1.0));
    const double next = std::min(hi, x + step);
    sum += Rule::integrate(fn, x, next);
    x = next;
  }
  return sum;
}

// Quantile-based box radius: P(Poisson(s) > R) <= tol.
long poisson_radius(double s, double tol) {
  if (s <= 0.0) return 1;
  double log_pmf = -s;
  double tail_log = 0.0;
  long k = 0;
  for (;; ++k) {
    if (k > 0) log_pmf += std::log(s) - std::log(static_cast<double>(k));
    if (static_cast<double>(k) > s) {
      const double r = s / static_cast<double>(k + 1);
      tail_log = log_pmf + std::log(r / (1.0 - r));
      if (tail_log <= std::log(tol)) break;
    }
  }
  return k + 1;
}

}  // namespace

double rw_kernel_1d(double s, long m, double tol) {
  require(s >= 0.0, ErrorCode::InvalidArgument, "time must be nonnegative");
  require(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  return kernel_1d_impl(s, m, tol);
}

double rw_kernel(int d, double t, const std::vector<long>& x, double tol) {
  require(d >= 1 && static_cast<std::size_t>(d) == x.size(), ErrorCode::DimensionMismatch,
          "lattice vector length must equal d");
  double p = 1.0;
  for (long xi : x) p *= rw_kernel_1d(t / d, xi, tol / d);
  return p;
}

double alpha_T(int d, double horizon, double tol) {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  require(horizon >= 0.0, ErrorCode::InvalidArgument, "T must be nonnegative");
  (void)tol;
  return 2.0 * panel_integral([d](double s) { return p00(d, s); }, 0.0, horizon, 0.5, 1.25);
}

AlphaCurve alpha_curve(int d, const std::vector<double>& T_grid, double tol) {
  AlphaCurve out;
  out.d = d;
  out.T_grid = T_grid;
  double acc = 0.0;
  double prev = 0.0;
  for (double T : T_grid) {
    require(T >= prev, ErrorCode::InvalidArgument, "T grid must be increasing");
    // Integrate the increment with panels anchored at the absolute position.
    double x = prev;
    while (x < T) {
      const double step = std::max(0.5, x * 0.25);
      const double next = std::min(T, x + step);
      acc += 2.0 * Rule::integrate([d](double s) { return p00(d, s); }, x, next);
      x = next;
    }
    out.alpha.push_back(acc);
    prev = T;
  }
  (void)tol;
  return out;
}

L2Identity l2_identity_check(int d, double horizon, double tol) {
  require(d >= 1 && d <= 3, ErrorCode::InvalidArgument, "l2 identity check supports d = 1, 2, 3");
  require(horizon > 0.0, ErrorCode::InvalidArgument, "T must be positive");
  L2Identity out;
  const double s_max = horizon / d;
  const long R = poisson_radius(s_max, tol) + 2;
  out.box_radius = R;

  // Quadrature nodes in t over graded panels.
  std::vector<double> nodes;
  std::vector<double> weights;
  {
    double x = 0.0;
    while (x < horizon) {
      const double step = std::max(0.25, x * 0.2);
      const double next = std::min(horizon, x + step);
      const double half = 0.5 * (next - x);
      const double mid = 0.5 * (next + x);
      const auto& abscissa = Rule::abscissa();
      const auto& weight = Rule::weights();
      for (std::size_t i = 0; i < abscissa.size(); ++i) {
        const double offsets[2] = {abscissa[i], -abscissa[i]};
        for (int sgn = 0; sgn < (abscissa[i] == 0.0 ? 1 : 2); ++sgn) {
          nodes.push_back(mid + half * offsets[sgn]);
          weights.push_back(half * weight[i]);
        }
      }
      x = next;
    }
  }
  const std::size_t K = nodes.size();
  // table[k][m + R + 1] = q_{t_k/d}(m) for m in [-R-1, R+1].
  const long width = 2 * R + 3;
  std::vector<double> table(K * static_cast<std::size_t>(width));
  for (std::size_t k = 0; k < K; ++k)
    for (long m = 0; m <= R + 1; ++m) {
      const double v = kernel_1d_impl(nodes[k] / d, m, 0.0);
      table[k * static_cast<std::size_t>(width) + static_cast<std::size_t>(m + R + 1)] = v;
      table[k * static_cast<std::size_t>(width) + static_cast<std::size_t>(-m + R + 1)] = v;
    }
  auto q = [&](std::size_t k, long m) { return table[k * static_cast<std::size_t>(width) + static_cast<std::size_t>(m + R + 1)]; };

  // D(t, z) = (q(z1) - q(z1 - 1)) prod_{i>=2} q(z_i); coordinates 2..d are folded by sign symmetry.
  std::vector<double> other(K, 1.0);
  double lhs = 0.0;
  auto accumulate_first = [&](double mult) {
    for (long z1 = -R; z1 <= R + 1; ++z1) {
      double integral = 0.0;
      for (std::size_t k = 0; k < K; ++k) integral += weights[k] * (q(k, z1) - q(k, z1 - 1)) * other[k];
      lhs += mult * integral * integral;
    }
  };
  if (d == 1) {
    accumulate_first(1.0);
  } else if (d == 2) {
    for (long z2 = 0; z2 <= R; ++z2) {
      for (std::size_t k = 0; k < K; ++k) other[k] = q(k, z2);
      accumulate_first(z2 == 0 ? 1.0 : 2.0);
    }
  } else {
    for (long z2 = 0; z2 <= R; ++z2)
      for (long z3 = 0; z3 <= R; ++z3) {
        for (std::size_t k = 0; k < K; ++k) other[k] = q(k, z2) * q(k, z3);
        accumulate_first((z2 == 0 ? 1.0 : 2.0) * (z3 == 0 ? 1.0 : 2.0));
      }
  }
  out.lhs = lhs;

  const double a = panel_integral([d](double s) { return p00(d, s); }, 0.0, horizon, 0.25, 1.2);
  const double b = panel_integral([d](double s) { return p00(d, s); }, horizon, 2.0 * horizon, 0.25, 1.2);
  out.rhs = 2.0 * (a - b);
  out.gap = std::abs(out.lhs - out.rhs) / out.rhs;
  return out;
}

double ornstein_survival(int d, double t) {
  require(d >= 1 && t >= 0.0, ErrorCode::InvalidArgument, "need d >= 1 and t >= 0");
  // Difference of the two differing coordinates is a rate-2/d walk started at 1;
  // by reflection P(no hit of 0 by time s) = q_s(0) + q_s(1) for the rate-1 walk.
  const double s = 2.0 * t / d;
  return kernel_1d_impl(s, 0, 0.0) + kernel_1d_impl(s, 1, 0.0);
}

C1Constant c1_constant(int d, double horizon) {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  C1Constant out;
  out.split = std::max(10.0, horizon);
  out.quadrature_part = panel_integral(
      [d](double s) {
        const double a = kernel_1d_impl(s / d, 0, 0.0);
        const double b = kernel_1d_impl(s / d, 1, 0.0);
        return std::pow(a, d - 1) * (a - b);
      },
      0.0, out.split, 0.25, 1.2);
  out.tail = p00(d, out.split);
  out.value = out.quadrature_part + out.tail;
  return out;
}

CInfConstant cinf_constant(int d) {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  CInfConstant out;
  out.limit = 2.0 * std::sqrt(d / std::numbers::pi);
  double acc = 0.0;
  double prev = 0.0;
  for (int k = 0; k <= 8 * 16; ++k) {
    const double T = std::pow(10.0, -2.0 + k / 16.0);
    acc += panel_integral([d](double s) { return ornstein_survival(d, s); }, prev, T, 0.5, 1.25);
    out.grid_sup = std::max(out.grid_sup, acc / std::sqrt(T));
    prev = T;
  }
  out.value = std::max(out.grid_sup, out.limit);
  return out;
}

double phi_bound_rw(double f_norm, NormSpace space, int d, double horizon) {
  require(f_norm >= 0.0, ErrorCode::InvalidArgument, "norm must be nonnegative");
  require(horizon >= 0.0, ErrorCode::InvalidArgument, "T must be nonnegative");
  if (f_norm == 0.0) return 0.0;
  switch (space) {
    case NormSpace::L1:
      return c1_constant(d).value * f_norm;
    case NormSpace::L2:
      return f_norm * std::sqrt(alpha_T(d, horizon));
    case NormSpace::Linf:
      return cinf_constant(d).value * f_norm * std::sqrt(horizon);
  }
  return 0.0;
}

NormG norm_G_1to2(int d, double tol) {
  require(d >= 5, ErrorCode::DivergentForDimension, "int u p_u(0,0) du diverges for d <= 4");
  require(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  const double expo = 0.5 * d;
  auto integrand = [d](double u) { return u * p00(d, u); };
  auto evaluate = [&](double split, double body, NormG& g) {
    const double c = p00(d, split) * std::pow(1.0 + split, expo);
    g.split = split;
    g.tail = c * std::pow(1.0 + split, 2.0 - expo) / (expo - 2.0);
    g.certified_tail = 2.0 * g.tail;
    g.squared = body + g.tail;
    g.norm = std::sqrt(g.squared);
  };
  NormG out;
  double split = 10.0;
  double body = panel_integral(integrand, 0.0, split, 0.25, 1.2);
  evaluate(split, body, out);
  for (int it = 0; it < 40; ++it) {
    const double next = 2.0 * split;
    body += panel_integral(integrand, split, next, 0.25, 1.2);
    NormG candidate;
    evaluate(next, body, candidate);
    candidate.doubling_change = std::abs(candidate.norm - out.norm);
    out = candidate;
    split = next;
    if (out.doubling_change <= tol) return out;
  }
  fail(ErrorCode::DivergentSeries, "|G|_{1->2} did not self-converge under horizon doubling");
}

double conv_integral(int n, double horizon) {
  require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
  require(horizon >= 0.0, ErrorCode::InvalidArgument, "T must be nonnegative");
  if (horizon == 0.0) return 0.0;
  // Inner integral over t in [s, T] is 2 (1 - (1 + T - s)^{-1/2}).
  const double half_n = 0.5 * n;
  auto fn = [&](double s) {
    return std::pow(1.0 + s, -half_n) * 2.0 * (1.0 - 1.0 / std::sqrt(1.0 + horizon - s));
  };
  // Panels graded away from both ends; the integrand varies on scale 1 near s = 0 and s = T.
  const double mid = 0.5 * horizon;
  double sum = panel_integral(fn, 0.0, mid, 0.5, 1.25);
  sum += panel_integral([&](double r) { return fn(horizon - r); }, 0.0, horizon - mid, 0.5, 1.25);
  return sum;
}

ConvLemmaReport conv_lemma_check(int n, const std::vector<double>& T_grid) {
  require(n >= 1 && n <= 3, ErrorCode::InvalidArgument, "n must be 1, 2 or 3");
  require(T_grid.size() >= 2, ErrorCode::InvalidArgument, "need at least two grid points");
  for (std::size_t i = 1; i < T_grid.size(); ++i)
    require(T_grid[i] > T_grid[i - 1], ErrorCode::InvalidArgument, "T grid must be increasing");
  ConvLemmaReport out;
  out.n = n;
  out.T_grid = T_grid;
  for (double T : T_grid) out.values.push_back(conv_integral(n, T));
  const double top = T_grid.back();
  if (T_grid.size() >= 5) out.exponent = loglog_fit(T_grid, out.values).slope;
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < T_grid.size(); ++i)
    if (T_grid[i] >= 0.1 * top) {
      const double r = out.values[i] / std::log1p(T_grid[i]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  out.log_ratio_variation = hi / lo - 1.0;
  out.sup = *std::max_element(out.values.begin(), out.values.end());
  out.last_decade_increase = out.values.back() / conv_integral(n, 0.1 * top) - 1.0;
  return out;
}

}  // namespace cbounds
