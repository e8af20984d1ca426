#include "cbounds/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

namespace cbounds {

namespace {

struct SimpsonState {
  const VectorIntegrand& fn;
  std::size_t evaluations = 0;
  double error = 0.0;
  int max_depth;
};

Vector simpson_recurse(SimpsonState& st, double a, double b, const Vector& fa, const Vector& fm, const Vector& fb,
                       const Vector& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const Vector flm = st.fn(lm);
  const Vector frm = st.fn(rm);
  st.evaluations += 2;
  const Vector left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Vector right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Vector delta = left + right - whole;
  const double err = delta.lpNorm<Eigen::Infinity>() / 15.0;
  if (depth >= st.max_depth || err <= tol) {
    st.error += err;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

VectorQuadrature adaptive_simpson(const VectorIntegrand& fn, double a, double b, double abs_tol, int max_depth) {
  SimpsonState st{fn, 0, 0.0, max_depth};
  // Split into four panels first so that integrands peaked near one end are not
  // mistaken for smooth by a single coarse Simpson estimate.
  constexpr int kInitialPanels = 4;
  const double width = (b - a) / kInitialPanels;
  Vector total;
  for (int k = 0; k < kInitialPanels; ++k) {
    const double lo = a + k * width;
    const double hi = (k + 1 == kInitialPanels) ? b : lo + width;
    const Vector flo = fn(lo);
    const Vector fmid = fn(0.5 * (lo + hi));
    const Vector fhi = fn(hi);
    st.evaluations += 3;
    const Vector whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    const Vector part = simpson_recurse(st, lo, hi, flo, fmid, fhi, whole, abs_tol / kInitialPanels, 0);
    total = (k == 0) ? part : Vector(total + part);
  }
  return {total, st.error, st.evaluations};
}

double gauss_legendre_panels(const std::function<double(double)>& fn, const std::vector<double>& breaks) {
  using Rule = boost::math::quadrature::gauss<double, 24>;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) sum += Rule::integrate(fn, breaks[i], breaks[i + 1]);
  return sum;
}

std::vector<double> graded_breaks(double a, double b, double h, double ratio) {
  std::vector<double> out{0.0};
  double x = 0.0;
  while (x + h < a) {
    x += h;
    out.push_back(x);
  }
  if (a > x) {
    x = a;
    out.push_back(x);
  }
  double step = std::max(h, x * (ratio - 1.0));
  while (x < b) {
    x = std::min(b, x + step);
    out.push_back(x);
    step *= ratio;
  }
  return out;
}

}  // namespace cbounds
