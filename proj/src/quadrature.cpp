#include "bcpp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "bcpp/errors.hpp"

namespace bcpp {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix of
// the three-term recurrence, weights mu0 times the squared first components
// of the eigenvectors.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
  const Eigen::Index n = offdiag.size() + 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    jac(i, i + 1) = offdiag(i);
    jac(i + 1, i) = offdiag(i);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  QuadratureRule rule;
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes.push_back(eig.eigenvalues()(i));
    rule.weights.push_back(mu0 * eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i));
  }
  // Symmetrize exactly: both rules are even.
  for (std::size_t i = 0, j = rule.nodes.size() - 1; i < j; ++i, --j) {
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (rule.nodes.size() % 2 == 1) rule.nodes[rule.nodes.size() / 2] = 0.0;
  return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int order) {
  if (order < 1) throw ConfigError("quadrature order must be >= 1", {}, "order");
  if (order == 1) return {{0.0}, {std::sqrt(std::numbers::pi)}};
  Eigen::VectorXd off(order - 1);
  for (int i = 1; i < order; ++i) off(i - 1) = std::sqrt(0.5 * i);
  return golub_welsch(off, std::sqrt(std::numbers::pi));
}

QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw ConfigError("quadrature order must be >= 1", {}, "order");
  if (order == 1) return {{0.0}, {2.0}};
  Eigen::VectorXd off(order - 1);
  for (int i = 1; i < order; ++i) off(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
  return golub_welsch(off, 2.0);
}

QuadratureRule composite_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw ConfigError("need at least one panel", {}, "panels");
  const QuadratureRule base = gauss_legendre(order);
  const double h = (b - a) / panels;
  QuadratureRule rule;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      rule.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
      rule.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return rule;
}

QuadratureRule simpson(double a, double b, int points) {
  if (points < 3 || points % 2 == 0) {
    throw ConfigError("Simpson's rule needs an odd number of points >= 3, got " + std::to_string(points), {},
                      "time_steps");
  }
  const double h = (b - a) / (points - 1);
  QuadratureRule rule;
  for (int i = 0; i < points; ++i) {
    rule.nodes.push_back(i == points - 1 ? b : a + i * h);
    const double c = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    rule.weights.push_back(c * h / 3.0);
  }
  return rule;
}

}  // namespace bcpp
