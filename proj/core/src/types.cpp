#include "cbounds/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbounds {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ErrorCode::RowSumNonzero: return "RowSumNonzero";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NoDecayDetected: return "NoDecayDetected";
    case ErrorCode::SemimetricOnly: return "SemimetricOnly";
    case ErrorCode::ContractionViolated: return "ContractionViolated";
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::DivergentSeries: return "DivergentSeries";
    case ErrorCode::DivergentForDimension: return "DivergentForDimension";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::InvariantBroken: return "InvariantBroken";
    case ErrorCode::TorusTooSmall: return "TorusTooSmall";
    case ErrorCode::DegenerateBatch: return "DegenerateBatch";
    case ErrorCode::NonPositiveData: return "NonPositiveData";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::CheckFailed: return "CheckFailed";
  }
  return "Unknown";
}

namespace {
constexpr double kRowSumTol = 1e-12;
constexpr double kMassTol = 1e-12;
}  // namespace

GeneratorMatrix GeneratorMatrix::validate(const Matrix& raw) {
  require(raw.rows() == raw.cols(), ErrorCode::DimensionMismatch, "generator must be square");
  require(raw.rows() > 0, ErrorCode::DimensionMismatch, "generator must be non-empty");
  require(raw.allFinite(), ErrorCode::InvalidArgument, "generator has non-finite entries");
  const Eigen::Index n = raw.rows();
  Matrix q = raw;
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    double scale = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      scale = std::max(scale, std::abs(raw(i, j)));
      if (i == j) continue;
      if (raw(i, j) < 0.0) {
        fail(ErrorCode::NegativeOffDiagonal,
             "q[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + std::to_string(raw(i, j)));
      }
      off += raw(i, j);
    }
    const double row_sum = raw.row(i).sum();
    if (std::abs(row_sum) > kRowSumTol * scale) {
      fail(ErrorCode::RowSumNonzero, "row " + std::to_string(i) + " sums to " + std::to_string(row_sum));
    }
    q(i, i) = -off;
  }
  return GeneratorMatrix(std::move(q));
}

double GeneratorMatrix::max_exit_rate() const noexcept {
  return q_.rows() == 0 ? 0.0 : (-q_.diagonal()).maxCoeff();
}

GeneratorMatrix validate_generator(const Matrix& raw) { return GeneratorMatrix::validate(raw); }

ProbVector::ProbVector(const Vector& p) : p_(p) {
  require(p.size() > 0, ErrorCode::InvalidDistribution, "empty distribution");
  require(p.allFinite(), ErrorCode::InvalidDistribution, "non-finite mass");
  require(p.minCoeff() >= 0.0, ErrorCode::InvalidDistribution, "negative mass");
  const double total = p.sum();
  require(std::abs(total - 1.0) <= kMassTol * static_cast<double>(p.size()), ErrorCode::InvalidDistribution,
          "mass sums to " + std::to_string(total));
  p_ /= total;
}

ProbVector ProbVector::dirac(std::size_t n, std::size_t i) {
  Vector p = Vector::Zero(static_cast<Eigen::Index>(n));
  p(static_cast<Eigen::Index>(i)) = 1.0;
  return ProbVector(p);
}

ProbVector ProbVector::uniform(std::size_t n) {
  return ProbVector(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

bool satisfies_triangle(const Matrix& rho, double tol) {
  const Eigen::Index n = rho.rows();
  const double slack = tol * std::max(1.0, rho.maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (rho(i, j) > rho(i, k) + rho(k, j) + slack) return false;
  return true;
}

FiniteMetric::FiniteMetric(const Matrix& rho, MetricMode mode) : rho_(rho), mode_(mode) {
  require(rho.rows() == rho.cols() && rho.rows() > 0, ErrorCode::DimensionMismatch, "metric must be square");
  require(rho.allFinite(), ErrorCode::InvalidMetric, "metric has non-finite entries");
  const Eigen::Index n = rho.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    require(rho(i, i) == 0.0, ErrorCode::InvalidMetric, "nonzero diagonal at " + std::to_string(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      require(rho(i, j) >= 0.0, ErrorCode::InvalidMetric, "negative distance");
      require(rho(i, j) == rho(j, i), ErrorCode::InvalidMetric, "metric is not symmetric");
      if (mode == MetricMode::Metric && i != j)
        require(rho(i, j) > 0.0, ErrorCode::InvalidMetric, "metric mode needs positive off-diagonal distances");
    }
  }
  if (mode == MetricMode::Metric)
    require(satisfies_triangle(rho), ErrorCode::InvalidMetric, "triangle inequality violated");
}

FiniteMetric FiniteMetric::discrete(std::size_t n) {
  Matrix rho = Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  rho.diagonal().setZero();
  return FiniteMetric(rho, MetricMode::Metric);
}

FiniteMetric FiniteMetric::path(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  Matrix rho(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) rho(i, j) = static_cast<double>(std::abs(i - j));
  return FiniteMetric(rho, MetricMode::Metric);
}

Matrix FiniteMetric::shortest_path_closure() const {
  Matrix d = rho_;
  const Eigen::Index n = d.rows();
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

ObservableSpec ObservableSpec::finite(Vector f, double horizon) {
  require(horizon > 0.0, ErrorCode::NonPositiveParameter, "horizon must be positive");
  require(f.allFinite(), ErrorCode::InvalidArgument, "observable has non-finite entries");
  return ObservableSpec{FiniteVectorObservable{std::move(f)}, horizon};
}

const Vector& ObservableSpec::finite_vector(std::size_t n) const {
  const auto* fv = std::get_if<FiniteVectorObservable>(&kind);
  require(fv != nullptr, ErrorCode::InvalidArgument, "observable is not a finite vector");
  require(static_cast<std::size_t>(fv->f.size()) == n, ErrorCode::DimensionMismatch,
          "observable length does not match chain size");
  require(horizon > 0.0, ErrorCode::NonPositiveParameter, "horizon must be positive");
  return fv->f;
}

}  // namespace cbounds
