#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbounds {

/// Every failure raised by the library carries one of these codes.
enum class ErrorCode {
  NegativeOffDiagonal,
  RowSumNonzero,
  InvalidDistribution,
  InvalidMetric,
  InvalidArgument,
  DimensionMismatch,
  Degenerate,
  Overflow,
  Reducible,
  NoDecayDetected,
  SemimetricOnly,
  ContractionViolated,
  NonPositiveParameter,
  DivergentSeries,
  DivergentForDimension,
  StepTooLarge,
  InvariantBroken,
  TorusTooSmall,
  DegenerateBatch,
  NonPositiveData,
  ConfigInvalid,
  CheckFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the contraction suite; carries the pair and time that broke the check.
class ContractionViolated : public Error {
 public:
  ContractionViolated(std::size_t x, std::size_t y, double t, const std::string& what)
      : Error(ErrorCode::ContractionViolated, what), x_(x), y_(y), t_(t) {}

  std::size_t x() const noexcept { return x_; }
  std::size_t y() const noexcept { return y_; }
  double t() const noexcept { return t_; }

 private:
  std::size_t x_;
  std::size_t y_;
  double t_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace cbounds
