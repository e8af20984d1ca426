#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cbounds/errors.hpp"

namespace cbounds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Rate matrix of a finite continuous-time Markov chain. Off-diagonal entries
/// are nonnegative and every row sums to zero; the diagonal is always the exact
/// negative off-diagonal row sum.
class GeneratorMatrix {
 public:
  /// Accepts raw rates, repairs the diagonal when a row sum is within 1e-12 of
  /// zero (relative to the row scale) and rejects everything else.
  static GeneratorMatrix validate(const Matrix& raw);

  std::size_t size() const noexcept { return static_cast<std::size_t>(q_.rows()); }
  const Matrix& rates() const noexcept { return q_; }
  double operator()(std::size_t i, std::size_t j) const { return q_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }

  /// max_i |q_ii|, the uniformization rate.
  double max_exit_rate() const noexcept;
  double exit_rate(std::size_t i) const { return -(*this)(i, i); }

 private:
  explicit GeneratorMatrix(Matrix q) : q_(std::move(q)) {}
  Matrix q_;
};

GeneratorMatrix validate_generator(const Matrix& raw);

/// Probability mass on {0, ..., n-1}.
class ProbVector {
 public:
  /// Entries must be nonnegative and sum to one within 1e-12; the stored
  /// vector is renormalized to sum exactly to one in floating point.
  explicit ProbVector(const Vector& p);

  static ProbVector dirac(std::size_t n, std::size_t i);
  static ProbVector uniform(std::size_t n);

  std::size_t size() const noexcept { return static_cast<std::size_t>(p_.size()); }
  const Vector& values() const noexcept { return p_; }
  double operator[](std::size_t i) const { return p_(static_cast<Eigen::Index>(i)); }

 private:
  Vector p_;
};

enum class MetricMode { Semimetric, Metric };

/// Distance matrix on a finite state space.
class FiniteMetric {
 public:
  FiniteMetric(const Matrix& rho, MetricMode mode);

  static FiniteMetric discrete(std::size_t n);
  /// rho(i, j) = |i - j| on a path.
  static FiniteMetric path(std::size_t n);

  std::size_t size() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
  const Matrix& distances() const noexcept { return rho_; }
  MetricMode mode() const noexcept { return mode_; }
  double operator()(std::size_t i, std::size_t j) const { return rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }

  double diameter() const noexcept { return rho_.maxCoeff(); }
  /// Floyd-Warshall closure; equals the input whenever the triangle inequality holds.
  Matrix shortest_path_closure() const;

 private:
  Matrix rho_;
  MetricMode mode_;
};

/// Returns true when rho satisfies the triangle inequality up to `tol` (relative to the diameter).
bool satisfies_triangle(const Matrix& rho, double tol = 1e-12);

enum class NormSpace { L1, L2, Linf };

struct FiniteVectorObservable {
  Vector f;
};

/// A function on Z^d known only through one of its norms (used by the random-walk bounds).
struct LatticeObservable {
  int dimension = 1;
  NormSpace space = NormSpace::L2;
  double norm = 0.0;
};

/// H_A(eta) = prod_{a in A} eta(a) for the exclusion process.
struct OccupationSetObservable {
  std::vector<std::vector<int>> sites;
};

/// The family f_t = f 1_{t <= T}.
struct ObservableSpec {
  std::variant<FiniteVectorObservable, LatticeObservable, OccupationSetObservable> kind;
  double horizon = 1.0;

  static ObservableSpec finite(Vector f, double horizon);

  bool is_finite_vector() const noexcept { return std::holds_alternative<FiniteVectorObservable>(kind); }
  /// Throws InvalidArgument unless the observable is a finite vector of length n.
  const Vector& finite_vector(std::size_t n) const;
};

/// Identifies one reproducible random stream. Equal triples give bit-identical
/// streams; different triples give independent ones.
struct RngStreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replica_index = 0;
  std::string stream_tag;

  RngStreamSpec child(std::uint64_t replica) const { return {master_seed, replica, stream_tag}; }
  RngStreamSpec with_tag(std::string tag) const { return {master_seed, replica_index, std::move(tag)}; }

  friend bool operator==(const RngStreamSpec&, const RngStreamSpec&) = default;
};

}  // namespace cbounds
