#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bcpp/lattice.hpp"

namespace bcpp {

// Compressed-row sparse matrix with deterministic row-order products.
struct SparseOperator {
  std::size_t rows = 0;
  std::vector<std::size_t> row_start{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;

  void apply(std::span<const double> in, std::span<double> out) const;
  double row_sum(std::size_t row) const;
  double diagonal(std::size_t row) const;
  double max_abs_diagonal() const;
  double min_offdiagonal() const;
  // Largest row sum of |entries|.
  double inf_norm() const;
  Eigen::MatrixXd dense() const;
};

enum class PairKind { M_lambda, C_lambda };

// Operator on site pairs, pair (x, y) stored at x * n_sites + y.
//
// M_lambda row (x, x): 1 - 4 lambda d on the diagonal, lambda at (u, u),
// (x, u) and (u, x) for every u ~ x.
// M_lambda row (x, y), x != y: -4 lambda d on the diagonal, lambda at (u, y)
// for u ~ x and at (x, v) for v ~ y.
// C_lambda is the generator of two independent walks jumping at rate lambda
// along each edge: -4 lambda d on the diagonal, lambda at (u, y) and (x, v).
struct PairGenerator {
  TorusGeometry geom;
  double lambda;
  PairKind kind;
  SparseOperator op;

  std::size_t pair_index(std::size_t x, std::size_t y) const { return x * geom.n_sites() + y; }
};

struct MomentLimits {
  std::size_t max_sites = 4096;
  std::size_t memory_budget_bytes = std::size_t{2} << 30;
};

// Throws ConfigError when L^d exceeds the site limit or the operator would
// exceed the memory budget.
PairGenerator build_pair_generator(double lambda, const TorusGeometry& geom, PairKind kind,
                                   const MomentLimits& limits = {});

struct UniformizationOptions {
  double tolerance = 1e-13;       // relative, on the sup norm of the result
  double max_step_rate = 40.0;    // q * dt per chunk
  std::size_t max_terms = 20000;  // per chunk
};

// e^{tA} v for A with nonnegative off-diagonal entries. With q >= max |A_ii|
// the matrix B = A + qI is nonnegative and
//
//   e^{tA} v = e^{-qt} sum_k (t^k / k!) B^k v.
//
// The series is cut once the geometric bound on the remaining terms drops
// below tolerance * |partial sum|. Throws NumericError when the term budget
// runs out.
std::vector<double> expm_action(const SparseOperator& a, std::span<const double> v, double t,
                                const UniformizationOptions& options = {});

// Gamma_t = e^{t gen} Gamma_0. Throws DomainError for t < 0 or non-finite
// input.
std::vector<double> evolve_pair_moments(std::span<const double> gamma0, double t, const PairGenerator& gen,
                                        const UniformizationOptions& options = {});

// Gamma_0(x, y) = eta_0(x) eta_0(y).
std::vector<double> product_pairs(std::span<const double> eta0);

// Operator on the centered ball |x|_inf <= R, zero outside.
// Row x != O: -4 lambda d on the diagonal, 2 lambda to each neighbor.
// Row O: 1 - 2 lambda d on the diagonal, 4 lambda d to e_1.
struct PsiOperator {
  int dim;
  int radius;
  double lambda;
  SparseOperator op;

  BoxIndexer indexer() const { return {dim, radius}; }
};

// Throws ConfigError for R < 2.
PsiOperator build_psi(double lambda, int dim, int radius);

// J_t = e^{t Psi} 1 on the ball.
std::vector<double> evolve_J(double t, const PsiOperator& psi, const UniformizationOptions& options = {});
std::vector<double> evolve_J(double t, double lambda, int dim, int radius,
                             const UniformizationOptions& options = {});

// max |(Psi Lambda)(x)| over |x|_inf < R, with Lambda(x) = k(x) + h.
// k is indexed by the centered box of radius k_radius >= R.
double psi_null_residual(const PsiOperator& psi, std::span<const double> k, int k_radius, double h);

// Minimum entry of e^{t M_lambda} - e^{t C_lambda} from dense exponentials.
// Throws ConfigError when L^d > 64.
double check_eq23_positivity(double t, double lambda, const TorusGeometry& geom);

struct SecondMomentBound {
  double h;
  double factor;  // (k(O) + h) / h with k(O) = 1
  double bound;   // sup_norm^2 * factor
};

// Throws DomainError when h <= 0.
SecondMomentBound second_moment_bound_table(double lambda, int dim, double gamma, double sup_norm = 1.0);

// Replica estimates of E[eta_t(x) eta_t(y)] for every pair, one path per
// replica, read off at each time in t_list.
struct PairMomentEstimate {
  std::vector<double> t_list;
  std::vector<std::vector<double>> mean;  // [t][pair]
  std::vector<std::vector<double>> standard_error;
  std::uint64_t replicas;
};

PairMomentEstimate mc_pair_moments(const TorusGeometry& geom, double lambda, std::span<const double> eta0,
                                   std::span<const double> t_list, std::uint64_t replicas, std::uint64_t seed,
                                   int workers = 1);

}  // namespace bcpp
