#pragma once

#include "cbounds/types.hpp"

namespace cbounds {

struct CouplingPlan {
  Matrix pi;
  double cost = 0.0;
};

/// f with f(x) - f(y) <= rho(x, y) and value = mu(f) - nu(f).
struct DualPotential {
  Vector f;
  double value = 0.0;
};

/// Exact min-cost transport between mu and nu for cost rho.
CouplingPlan wasserstein_primal(const ProbVector& mu, const ProbVector& nu, const FiniteMetric& rho);

/// Optimal 1-Lipschitz potential. For a metric the value equals the primal cost;
/// for a semimetric it equals the primal cost for the shortest-path closure of rho.
DualPotential wasserstein_dual(const ProbVector& mu, const ProbVector& nu, const FiniteMetric& rho);

struct TransportSolution {
  CouplingPlan plan;
  DualPotential dual;
};

TransportSolution solve_transport(const ProbVector& mu, const ProbVector& nu, const FiniteMetric& rho);

/// Same as solve_transport on raw mass vectors (used in hot loops where the
/// marginals come from a stochastic matrix row and are already validated).
TransportSolution solve_transport_raw(const Vector& mu, const Vector& nu, const Matrix& cost, const Matrix& closure);

}  // namespace cbounds
