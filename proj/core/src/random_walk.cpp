#include <cmath>

#include "cbounds/simulators.hpp"

namespace cbounds {

namespace {

void check_points(int d, const std::vector<long>& x, const std::vector<long>& y, double horizon) {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
  require(x.size() == static_cast<std::size_t>(d) && y.size() == static_cast<std::size_t>(d),
          ErrorCode::DimensionMismatch, "points must have d coordinates");
  require(horizon >= 0.0, ErrorCode::InvalidArgument, "horizon must be nonnegative");
}

}  // namespace

OrnsteinResult simulate_rw_ornstein(int d, const std::vector<long>& x, const std::vector<long>& y, double horizon,
                                    RngStream& rng) {
  check_points(d, x, y, horizon);
  OrnsteinResult out;
  out.x_final = x;
  out.y_final = y;
  std::size_t differing = 0;
  for (int i = 0; i < d; ++i)
    if (x[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(i)]) ++differing;
  if (differing == 0) {
    out.coupled = true;
    out.tau = 0.0;
  }
  // Each coordinate of each walker moves at rate 1/d. Agreeing coordinates move
  // jointly (one clock), differing ones carry two independent clocks.
  const double coord_rate = 1.0 / d;
  double t = 0.0;
  for (;;) {
    const double total = coord_rate * static_cast<double>(static_cast<std::size_t>(d) + differing);
    t += rng.exponential(total);
    if (t >= horizon) break;
    // Pick one of the d + differing clocks uniformly.
    std::uint64_t k = rng.index(static_cast<std::uint64_t>(d) + differing);
    const long step = rng.coin() ? 1 : -1;
    std::size_t coord = 0;
    int which = 0;  // 0 joint, 1 walker x, 2 walker y
    for (int i = 0; i < d; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const bool diff = out.x_final[ui] != out.y_final[ui];
      const std::uint64_t slots = diff ? 2 : 1;
      if (k < slots) {
        coord = ui;
        which = diff ? static_cast<int>(k) + 1 : 0;
        break;
      }
      k -= slots;
    }
    if (which == 0) {
      out.x_final[coord] += step;
      out.y_final[coord] += step;
    } else {
      (which == 1 ? out.x_final : out.y_final)[coord] += step;
      if (out.x_final[coord] == out.y_final[coord]) {
        --differing;
        if (differing == 0 && !out.coupled) {
          out.coupled = true;
          out.tau = t;
        }
      }
    }
  }
  if (!out.coupled) out.tau = horizon;
  return out;
}

OrnsteinResult ornstein_coupling_time(int d, const std::vector<long>& x, const std::vector<long>& y, double horizon,
                                      RngStream& rng) {
  check_points(d, x, y, horizon);
  OrnsteinResult out;
  out.x_final = x;
  out.y_final = y;
  std::vector<long> diff(static_cast<std::size_t>(d));
  std::size_t differing = 0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = y[i] - x[i];
    if (diff[i] != 0) ++differing;
  }
  // Each nonzero difference is a walk at rate 2/d until it hits 0.
  const double rate = 2.0 / d;
  double t = 0.0;
  while (differing > 0) {
    t += rng.exponential(rate * static_cast<double>(differing));
    if (t >= horizon) break;
    std::uint64_t k = rng.index(differing);
    for (auto& v : diff) {
      if (v == 0) continue;
      if (k-- == 0) {
        v += rng.coin() ? 1 : -1;
        if (v == 0) --differing;
        break;
      }
    }
  }
  out.coupled = differing == 0;
  out.tau = out.coupled ? t : horizon;
  return out;
}

}  // namespace cbounds
