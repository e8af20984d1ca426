#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "cbounds/types.hpp"

namespace cbounds {

/// xoshiro256++ keyed by an RngStreamSpec. The key is derived by hashing
/// (seed, replica, tag) through splitmix64, so streams are splittable and
/// independent of thread scheduling. Satisfies UniformRandomBitGenerator.
///
/// All distribution samplers below are implemented here rather than taken from
/// <random>, whose distributions are implementation-defined; sample streams
/// must be bit-identical across standard libraries.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(const RngStreamSpec& spec);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0, 1); never returns 0 or 1.
  double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer on [0, n) (Lemire's multiply-shift with rejection).
  std::uint64_t index(std::uint64_t n) noexcept;

  bool coin() noexcept { return ((*this)() >> 63) != 0; }
  bool bernoulli(double p) noexcept { return uniform() < p; }

  double exponential(double rate) noexcept;
  double normal() noexcept;
  std::uint64_t poisson(double mean) noexcept;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace cbounds
