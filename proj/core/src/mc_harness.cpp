#include "cbounds/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "cbounds/parallel.hpp"
#include "cbounds/rng.hpp"

namespace cbounds {

namespace {

double pairwise(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise(v, h) + pairwise(v + h, n - h);
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
}

void require_size(const SampleBatch& batch, std::size_t min) {
  batch.validate();
  require(batch.values.size() >= min, ErrorCode::DegenerateBatch, "batch must hold at least 100 samples");
}

}  // namespace

void SampleBatch::validate() const {
  require(!values.empty(), ErrorCode::DegenerateBatch, "empty batch");
  require(provenance.empty() || provenance.size() == values.size(), ErrorCode::DegenerateBatch,
          "provenance length must match values");
}

double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return pairwise(values.data(), values.size());
}

MeanSe mean_se(const std::vector<double>& values) {
  require(!values.empty(), ErrorCode::DegenerateBatch, "empty sample");
  const double n = static_cast<double>(values.size());
  MeanSe out;
  out.mean = stable_sum(values) / n;
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - out.mean) * (values[i] - out.mean);
  out.se = std::sqrt(stable_sum(std::move(sq)) / (n - 1.0) / n);
  return out;
}

LogMgfEstimate logmgf_estimate(const SampleBatch& batch, double lambda) {
  require_size(batch, 100);
  LogMgfEstimate out;
  if (lambda == 0.0) return out;
  const std::size_t n = batch.values.size();
  const double mean = stable_sum(batch.values) / static_cast<double>(n);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = lambda * (batch.values[i] - mean);
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(z[i] - zmax);
  const MeanSe m = mean_se(w);
  out.estimate = zmax + std::log(m.mean);
  // Delta method: se(log W) = se(W) / W.
  out.se = m.se / m.mean;
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t top = std::max<std::size_t>(1, n / 100);
  const double top_sum = pairwise(sorted.data(), top);
  out.top_share = top_sum / (m.mean * static_cast<double>(n));
  out.reliable = out.top_share <= 0.5;
  return out;
}

MomentEstimate moment_estimate(const SampleBatch& batch, double p, std::optional<double> center,
                               const RngStreamSpec& rng, std::size_t resamples) {
  require(p >= 1.0, ErrorCode::InvalidArgument, "p must be >= 1");
  require_size(batch, 100);
  const auto& v = batch.values;
  const std::size_t n = v.size();
  auto moment = [&](const std::vector<double>& sample) {
    const double c = center ? *center : stable_sum(sample) / static_cast<double>(sample.size());
    std::vector<double> d(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) d[i] = std::pow(std::abs(sample[i] - c), p);
    return std::pow(stable_sum(std::move(d)) / static_cast<double>(sample.size()), 1.0 / p);
  };
  MomentEstimate out;
  out.estimate = moment(v);
  const std::vector<double> boots = parallel_map<double>(resamples, [&](std::size_t b) {
    RngStream stream(rng.child(b));
    std::vector<double> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = v[stream.index(n)];
    return moment(sample);
  });
  out.ci_lo = percentile(boots, 0.025);
  out.ci_hi = percentile(boots, 0.975);
  return out;
}

VarianceEstimate variance_estimate(const std::vector<double>& values, const RngStreamSpec& rng,
                                   std::size_t resamples) {
  require(values.size() >= 2, ErrorCode::DegenerateBatch, "need at least two samples");
  const std::size_t n = values.size();
  auto var = [&](const std::vector<double>& s) {
    const double m = stable_sum(s) / static_cast<double>(n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = (s[i] - m) * (s[i] - m);
    return stable_sum(std::move(d)) / static_cast<double>(n - 1);
  };
  VarianceEstimate out;
  out.variance = var(values);
  const std::vector<double> boots = parallel_map<double>(resamples, [&](std::size_t b) {
    RngStream stream(rng.child(b));
    std::vector<double> sample(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = values[stream.index(n)];
    return var(sample);
  });
  out.ci_lo = percentile(boots, 0.025);
  out.ci_hi = percentile(boots, 0.975);
  return out;
}

FitReport loglog_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size(), ErrorCode::DimensionMismatch, "xs and ys differ in length");
  require(xs.size() >= 5, ErrorCode::InvalidArgument, "need at least 5 points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(xs[i] > 0.0 && ys[i] > 0.0, ErrorCode::NonPositiveData, "log-log fit needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  require(sxx > 0.0, ErrorCode::NonPositiveData, "xs must not all be equal");
  FitReport out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - out.intercept - out.slope * lx[i];
    sse += r * r;
  }
  out.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  out.ci_lo = out.slope - tq * se;
  out.ci_hi = out.slope + tq * se;
  return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(!samples.empty(), ErrorCode::DegenerateBatch, "empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - c, c - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

}  // namespace cbounds
