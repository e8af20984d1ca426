#include <cmath>

#include "cbounds/simulators.hpp"

namespace cbounds {

void DiffusionSpec::validate() const {
  require(static_cast<bool>(drift_neg_gradient), ErrorCode::InvalidArgument, "drift is not set");
  require(c > 0.0, ErrorCode::NonPositiveParameter, "convexity constant must be positive");
  require(dt > 0.0 && dt <= 0.1 / c, ErrorCode::StepTooLarge, "dt must lie in (0, 0.1/c]");
  require(horizon > 0.0, ErrorCode::InvalidArgument, "horizon must be positive");
}

CoupledDiffusionPath simulate_diffusion_coupled(const DiffusionSpec& spec, double x0, double y0, RngStream& rng,
                                                std::size_t record_every) {
  spec.validate();
  require(record_every >= 1, ErrorCode::InvalidArgument, "record_every must be >= 1");
  const auto steps = static_cast<std::size_t>(std::ceil(spec.horizon / spec.dt - 1e-9));
  const double dt = spec.horizon / static_cast<double>(steps);
  const double noise = std::sqrt(2.0 * dt);
  const double gap0 = std::abs(y0 - x0);

  CoupledDiffusionPath out;
  double x = x0;
  double y = y0;
  out.times.push_back(0.0);
  out.x.push_back(x);
  out.y.push_back(y);
  out.max_gap_ratio = gap0 > 0.0 ? 1.0 : 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double dw = noise * rng.normal();
    const double prev_gap = y - x;
    x += spec.drift_neg_gradient(x) * dt + dw;
    y += spec.drift_neg_gradient(y) * dt + dw;
    const double gap = y - x;
    if (prev_gap != 0.0 && (gap * prev_gap < 0.0 || std::abs(gap) > std::abs(prev_gap)))
      fail(ErrorCode::StepTooLarge, "coupled gap crossed or expanded; dt sup V'' exceeds 1");
    const double t = dt * static_cast<double>(i);
    if (gap0 > 0.0) {
      const double ratio = std::abs(gap) / (gap0 * std::exp(-spec.c * t));
      out.max_gap_ratio = std::max(out.max_gap_ratio, ratio);
      out.gronwall_K = std::max(out.gronwall_K, (ratio - 1.0) / dt);
    }
    if (i % record_every == 0 || i == steps) {
      out.times.push_back(t);
      out.x.push_back(x);
      out.y.push_back(y);
    }
  }
  return out;
}

double ou_stationary_integral(double c, double horizon, double dt, RngStream& rng) {
  require(c > 0.0 && horizon > 0.0 && dt > 0.0, ErrorCode::NonPositiveParameter, "c, T and dt must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  const double h = horizon / static_cast<double>(steps);
  const double noise = std::sqrt(2.0 * h);
  const double decay = 1.0 - c * h;
  double x = rng.normal() / std::sqrt(c);
  double sum = 0.5 * x;
  for (std::size_t i = 1; i < steps; ++i) {
    x = decay * x + noise * rng.normal();
    sum += x;
  }
  x = decay * x + noise * rng.normal();
  sum += 0.5 * x;
  return sum * h;
}

double ou_integral_variance(double c, double horizon) {
  return 2.0 / (c * c) * (horizon - (-std::expm1(-c * horizon)) / c);
}

}  // namespace cbounds
