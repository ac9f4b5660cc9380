#pragma once

#include <span>
#include <vector>

#include "bcpp/profiles.hpp"
#include "bcpp/quadrature.hpp"

namespace bcpp {

// rho(t, u) = E rho_0(u + sqrt(2 lambda t) Z) with Z standard normal in R^d,
// by a Gauss-Hermite product rule of the given order per dimension.
class HeatSolution {
 public:
  // Throws ConfigError for order < 8 or lambda <= 0.
  HeatSolution(DensityProfile profile, double lambda, int order = 20);

  // Throws DomainError for t < 0. t = 0 returns rho_0(u).
  double operator()(double t, std::span<const double> u) const;

  const DensityProfile& profile() const { return profile_; }
  double lambda() const { return lambda_; }
  int order() const { return order_; }

 private:
  DensityProfile profile_;
  double lambda_;
  int order_;
  QuadratureRule rule_;
};

double heat_solution(const DensityProfile& profile, double t, std::span<const double> u, double lambda,
                     int order = 20);

// Points and weights for integrating over the ball |u - center| <= radius in
// polar (d = 2) or spherical (d = 3) coordinates, so integrands that are
// smooth inside the ball converge spectrally even when they are not smooth
// across its boundary. Other dimensions fall back to composite
// Gauss-Legendre on the enclosing box.
struct BallQuadrature {
  int dim;
  std::vector<double> points;  // dim coordinates per point
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

// A positive `split` adds a radial breakpoint there (for integrands with a
// kink on an inner sphere).
BallQuadrature ball_quadrature(std::span<const double> center, double radius, int radial_order = 16,
                               int angular_order = 24, double split = 0.0);

struct GridSolution {
  int dim;
  int cells;          // per axis
  double step;
  double half_width;  // the box is [-half_width, half_width]^d
  double t;
  std::vector<double> values;  // cell averages, axis 0 fastest

  double center(int i) const { return -half_width + (i + 0.5) * step; }
  std::vector<double> cell_center(std::size_t index) const;
  double mass() const;
};

// Explicit Euler, second-order central differences, zero-flux walls, cell
// centered. dt = t / ceil(t / (h^2 / (4 lambda d))). Throws ConfigError when
// the box half-width is below supp(rho_0) + 4 sqrt(2 lambda t) or the grid
// would exceed max_cells.
GridSolution fd_heat_solver(const DensityProfile& profile, double t, double lambda, double grid_step,
                            double half_width, std::size_t max_cells = std::size_t{1} << 25);

// Continues a grid solution for another s units of time.
GridSolution fd_heat_continue(const GridSolution& start, double s, double lambda);

struct WeakResidualTerms {
  double final_pairing;    // int rho(t) G
  double initial_pairing;  // int rho_0 G
  double laplacian_time_integral;  // int_0^t int rho(s) Delta G du ds

  double residual(double lambda) const { return final_pairing - initial_pairing - lambda * laplacian_time_integral; }
};

struct WeakQuadrature {
  int gh_order = 20;
  int radial_order = 16;
  int angular_order = 24;
};

// time_steps is the number of Simpson nodes (odd, >= 3).
WeakResidualTerms weak_residual_terms(const DensityProfile& profile, const TestFunction& g, double t, double lambda,
                                      int time_steps, const WeakQuadrature& quad = {});

// int rho(t,u) G(u) du - int rho_0 G du - lambda int_0^t int rho(s,u) Delta G(u) du ds.
double weak_residual(const DensityProfile& profile, const TestFunction& g, double t, double lambda, int time_steps,
                     const WeakQuadrature& quad = {});

// int rho(t, u) G(u) du over supp G.
double heat_pairing(const HeatSolution& rho, const TestFunction& g, double t, const WeakQuadrature& quad = {});

}  // namespace bcpp
