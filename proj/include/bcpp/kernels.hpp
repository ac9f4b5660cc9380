#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bcpp/lattice.hpp"

namespace bcpp {

// Transition probabilities of the continuous-time simple random walk on the
// cycle Z_L in which each coordinate jumps to either neighbor at rate lambda:
//
//   p_t(j) = (1/L) sum_m exp(2 lambda t (cos(2 pi m / L) - 1)) cos(2 pi m j / L)
//
// Entries in [-1e-14, 0) are clamped to 0 and the vector renormalized; a more
// negative entry throws NumericError.
std::vector<double> cycle_kernel(double t, int side, double lambda);

// p_t(x, y) on a torus is a product of cycle kernels, one per coordinate.
struct KernelTable {
  double t;
  double lambda;
  TorusGeometry geom;
  std::vector<double> one_dim;

  double probability(std::size_t from, std::size_t to) const;
};

KernelTable make_kernel_table(double t, const TorusGeometry& geom, double lambda);
double torus_kernel(double t, std::size_t from, std::size_t to, const TorusGeometry& geom, double lambda);

// E eta_t(x) = sum_y p_t(x, y) eta_0(y), via d circular 1-d convolutions.
std::vector<double> first_moment(std::span<const double> initial, double t, double lambda,
                                 const TorusGeometry& geom);

enum class ReturnMethod { linear_solve, monte_carlo };

std::string_view to_string(ReturnMethod method);
ReturnMethod parse_return_method(std::string_view name);

// k(x) = P(discrete simple random walk from x ever visits O) on the centered
// l-infinity box of the given radius, in BoxIndexer order.
struct ReturnTable {
  int dim = 0;
  int radius = 0;
  ReturnMethod method = ReturnMethod::linear_solve;
  // Solve box radii. Two entries: pointwise extrapolation of two solves.
  std::vector<int> solve_radii;
  std::vector<double> values;
  std::vector<double> standard_error;  // monte_carlo only
  std::vector<double> ci_halfwidth;    // monte_carlo only, 95% normal interval
  int solver_iterations = 0;

  BoxIndexer indexer() const { return {dim, radius}; }
  double at(std::span<const int> x) const;
  double k_e1() const;
  std::size_t e1_index() const;
};

struct ReturnParams {
  // linear_solve: one radius, or two for extrapolation in R^{2-d}.
  std::vector<int> solve_radii{40};
  double tolerance = 1e-12;  // relative residual of the conjugate-gradient solve
  int max_iterations = 100000;
  // monte_carlo: walks per tabulated point, killed on leaving the box
  // |x|_inf <= escape_radius (the same absorbing box as the linear solve)
  // or after max_steps (0 = no cap).
  std::uint64_t walks = 100000;
  int escape_radius = 40;
  std::uint64_t max_steps = 0;
  int workers = 1;
};

// Throws ConfigError when a solve radius does not exceed the table radius or
// R < 2.
ReturnTable return_table(int dim, int radius, ReturnMethod method, const ReturnParams& params,
                         std::uint64_t seed);

// Single absorbing-box solve, returned on the whole box.
ReturnTable solve_return_box(int dim, int solve_radius, double tolerance, int max_iterations);

struct ReturnEstimate {
  double k;
  double standard_error;
  std::uint64_t hits;
  std::uint64_t walks;
};

// Fraction of walks from start that hit O before leaving the escape box.
// Walks are grouped in fixed blocks with per-block streams, so the result is
// independent of the worker count.
ReturnEstimate mc_return_probability(int dim, std::span<const int> start, const ReturnParams& params,
                                     std::uint64_t seed);

// max |k(x) - (1/2d) sum_{y~x} k(y)| over table points x != O whose
// neighbors all lie in the table.
double harmonic_residual(const ReturnTable& table);

// gamma_d = 1 - k(e_1).
double gamma_d(const ReturnTable& table);

struct HLambda {
  double value;
  bool positive;  // lambda above the critical bound
};

// h = (2 lambda d (2 gamma - 1) - 1) / (1 + 2 d lambda). Throws DomainError
// for gamma <= 1/2.
HLambda h_lambda(double lambda, int dim, double gamma);

// 1 / (2 d (2 gamma - 1)). Throws DomainError for gamma <= 1/2.
double lambda_critical_bound(int dim, double gamma);

}  // namespace bcpp
