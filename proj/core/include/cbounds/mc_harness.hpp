#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cbounds/types.hpp"

namespace cbounds {

struct SampleBatch {
  std::vector<double> values;
  std::vector<RngStreamSpec> provenance;

  /// Checks non-emptiness and matching provenance length.
  void validate() const;
};

/// Order-independent sum (sorts a copy, then pairwise reduction).
double stable_sum(std::vector<double> values);

struct LogMgfEstimate {
  double estimate = 0.0;
  double se = 0.0;
  /// Share of the total exp-weight carried by the largest 1% of samples.
  double top_share = 0.0;
  /// top_share <= 0.5.
  bool reliable = true;
};

/// log mean exp(lambda (v - mean v)) with a delta-method standard error.
LogMgfEstimate logmgf_estimate(const SampleBatch& batch, double lambda);

struct MomentEstimate {
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// (mean |v - center|^p)^{1/p}; center is the sample mean unless given.
/// 95% percentile bootstrap CI from `resamples` resamples drawn from `rng`.
MomentEstimate moment_estimate(const SampleBatch& batch, double p, std::optional<double> center,
                               const RngStreamSpec& rng, std::size_t resamples = 1000);

struct FitReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Least squares on (log x, log y) with a 95% t-interval on the slope.
FitReport loglog_fit(const std::vector<double>& xs, const std::vector<double>& ys);

/// sup_x |F_n(x) - cdf(x)|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov critical value sqrt(-log(alpha/2)/2) / sqrt(n).
double ks_critical(std::size_t n, double alpha);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& values);

/// Unbiased sample variance with a bootstrap 95% CI.
struct VarianceEstimate {
  double variance = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

VarianceEstimate variance_estimate(const std::vector<double>& values, const RngStreamSpec& rng,
                                   std::size_t resamples = 1000);

}  // namespace cbounds
