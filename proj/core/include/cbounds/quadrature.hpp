#pragma once

#include <functional>
#include <vector>

#include "cbounds/types.hpp"

namespace cbounds {

using VectorIntegrand = std::function<Vector(double)>;

struct VectorQuadrature {
  Vector value;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive Simpson applied componentwise; a panel is accepted when the
/// Richardson estimate is below its share of abs_tol in the max-norm.
VectorQuadrature adaptive_simpson(const VectorIntegrand& fn, double a, double b, double abs_tol,
                                  int max_depth = 40);

/// Composite 24-point Gauss-Legendre over the given breakpoints.
double gauss_legendre_panels(const std::function<double(double)>& fn, const std::vector<double>& breaks);

/// Breakpoints 0, h, 2h, ... up to `a`, then geometrically growing by `ratio` up to b.
std::vector<double> graded_breaks(double a, double b, double h, double ratio);

}  // namespace cbounds
