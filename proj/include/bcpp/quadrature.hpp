#pragma once

#include <vector>

namespace bcpp {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Integral of f(x) exp(-x^2) over the real line. Throws ConfigError for
// order < 1.
QuadratureRule gauss_hermite(int order);

// Integral of f over [-1, 1].
QuadratureRule gauss_legendre(int order);

// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
QuadratureRule composite_legendre(double a, double b, int panels, int order);

// Composite Simpson on [a, b] with `points` nodes (odd, >= 3).
QuadratureRule simpson(double a, double b, int points);

}  // namespace bcpp
