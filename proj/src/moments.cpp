#include "bcpp/moments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "bcpp/errors.hpp"
#include "bcpp/parallel.hpp"
#include "bcpp/process.hpp"
#include "bcpp/rng.hpp"

namespace bcpp {

void SparseOperator::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) s += vals[k] * in[cols[k]];
    out[r] = s;
  }
}

double SparseOperator::row_sum(std::size_t row) const {
  double s = 0.0;
  for (std::size_t k = row_start[row]; k < row_start[row + 1]; ++k) s += vals[k];
  return s;
}

double SparseOperator::diagonal(std::size_t row) const {
  for (std::size_t k = row_start[row]; k < row_start[row + 1]; ++k) {
    if (cols[k] == row) return vals[k];
  }
  return 0.0;
}

double SparseOperator::max_abs_diagonal() const {
  double m = 0.0;
  for (std::size_t r = 0; r < rows; ++r) m = std::max(m, std::abs(diagonal(r)));
  return m;
}

double SparseOperator::min_offdiagonal() const {
  double m = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) {
      if (cols[k] != r) m = std::min(m, vals[k]);
    }
  }
  return m;
}

double SparseOperator::inf_norm() const {
  double m = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) s += std::abs(vals[k]);
    m = std::max(m, s);
  }
  return m;
}

Eigen::MatrixXd SparseOperator::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols[k])) += vals[k];
    }
  }
  return m;
}

namespace {

// Appends one row from (column, value) contributions, merging duplicates and
// ordering by column.
class RowBuilder {
 public:
  explicit RowBuilder(SparseOperator& op) : op_(op) {}
  void add(std::size_t col, double val) { row_[col] += val; }
  void finish() {
    for (const auto& [c, v] : row_) {
      op_.cols.push_back(static_cast<std::uint32_t>(c));
      op_.vals.push_back(v);
    }
    op_.row_start.push_back(op_.cols.size());
    ++op_.rows;
    row_.clear();
  }

 private:
  SparseOperator& op_;
  std::map<std::size_t, double> row_;
};

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

PairGenerator build_pair_generator(double lambda, const TorusGeometry& geom, PairKind kind,
                                   const MomentLimits& limits) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0", {}, "lambda");
  const std::size_t n = geom.n_sites();
  if (n > limits.max_sites) {
    throw ConfigError("pair operator needs L^d <= " + std::to_string(limits.max_sites) + ", got " +
                          std::to_string(n),
                      {}, "L");
  }
  const auto deg = static_cast<std::size_t>(geom.degree());
  const std::size_t nnz = n * n * (1 + 2 * deg);
  const std::size_t bytes = nnz * (sizeof(double) + sizeof(std::uint32_t)) + (n * n + 1) * sizeof(std::size_t);
  if (bytes > limits.memory_budget_bytes) {
    throw ConfigError("pair operator needs about " + std::to_string(bytes >> 20) + " MiB, over the budget of " +
                          std::to_string(limits.memory_budget_bytes >> 20) + " MiB",
                      {}, "L");
  }
  PairGenerator gen{geom, lambda, kind, {}};
  SparseOperator& op = gen.op;
  op.cols.reserve(nnz);
  op.vals.reserve(nnz);
  op.row_start.reserve(n * n + 1);
  const double diag_rate = 4.0 * lambda * geom.dim();
  RowBuilder row(op);
  for (std::size_t x = 0; x < n; ++x) {
    const std::vector<std::size_t> nx = geom.neighbors(x);
    for (std::size_t y = 0; y < n; ++y) {
      const std::vector<std::size_t> ny = geom.neighbors(y);
      if (kind == PairKind::M_lambda && x == y) {
        row.add(gen.pair_index(x, x), 1.0 - diag_rate);
        for (std::size_t u : nx) {
          row.add(gen.pair_index(u, u), lambda);
          row.add(gen.pair_index(x, u), lambda);
          row.add(gen.pair_index(u, x), lambda);
        }
      } else {
        row.add(gen.pair_index(x, y), -diag_rate);
        for (std::size_t u : nx) row.add(gen.pair_index(u, y), lambda);
        for (std::size_t v : ny) row.add(gen.pair_index(x, v), lambda);
      }
      row.finish();
    }
  }
  return gen;
}

std::vector<double> expm_action(const SparseOperator& a, std::span<const double> v, double t,
                                const UniformizationOptions& options) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("exponential time must be finite and >= 0", {}, "t");
  if (v.size() != a.rows) throw InternalError("expm_action: vector size does not match the operator");
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("initial vector has non-finite entries");
  }
  std::vector<double> result(v.begin(), v.end());
  if (t == 0.0 || a.rows == 0) return result;
  if (a.min_offdiagonal() < 0.0) throw InternalError("expm_action: negative off-diagonal entry");

  const double q = a.max_abs_diagonal();
  // B = A + qI, kept as a shifted copy so products stay nonnegative.
  SparseOperator b = a;
  for (std::size_t r = 0; r < b.rows; ++r) {
    bool found = false;
    for (std::size_t k = b.row_start[r]; k < b.row_start[r + 1]; ++k) {
      if (b.cols[k] == r) {
        b.vals[k] += q;
        found = true;
      }
    }
    if (!found && q != 0.0) throw InternalError("expm_action: operator lacks a diagonal entry");
  }
  const double norm_b = b.inf_norm();
  const auto chunks = static_cast<std::size_t>(std::max(1.0, std::ceil(q * t / options.max_step_rate)));
  const double dt = t / static_cast<double>(chunks);

  std::vector<double> term(a.rows);
  std::vector<double> next(a.rows);
  std::vector<double> sum(a.rows);
  for (std::size_t c = 0; c < chunks; ++c) {
    term = result;
    sum = result;
    std::size_t k = 0;
    while (true) {
      ++k;
      if (k > options.max_terms) {
        throw NumericError("uniformization did not converge within " + std::to_string(options.max_terms) +
                           " terms (q*dt=" + std::to_string(q * dt) + ", |B|=" + std::to_string(norm_b) + ")");
      }
      b.apply(term, next);
      const double scale = dt / static_cast<double>(k);
      for (std::size_t i = 0; i < next.size(); ++i) {
        term[i] = next[i] * scale;
        sum[i] += term[i];
      }
      const double ratio = dt * norm_b / static_cast<double>(k + 1);
      if (ratio < 0.5) {
        const double tail = sup_norm(term) * ratio / (1.0 - ratio);
        const double size = sup_norm(sum);
        if (tail <= options.tolerance * size || size == 0.0) break;
      }
    }
    const double damp = std::exp(-q * dt);
    for (std::size_t i = 0; i < sum.size(); ++i) result[i] = sum[i] * damp;
    for (double x : result) {
      if (!std::isfinite(x)) throw NumericError("uniformization produced a non-finite value");
    }
  }
  return result;
}

std::vector<double> evolve_pair_moments(std::span<const double> gamma0, double t, const PairGenerator& gen,
                                        const UniformizationOptions& options) {
  if (gamma0.size() != gen.op.rows) {
    throw ConfigError("pair vector has " + std::to_string(gamma0.size()) + " entries, expected " +
                      std::to_string(gen.op.rows));
  }
  return expm_action(gen.op, gamma0, t, options);
}

std::vector<double> product_pairs(std::span<const double> eta0) {
  std::vector<double> g(eta0.size() * eta0.size());
  for (std::size_t x = 0; x < eta0.size(); ++x) {
    for (std::size_t y = 0; y < eta0.size(); ++y) g[x * eta0.size() + y] = eta0[x] * eta0[y];
  }
  return g;
}

PsiOperator build_psi(double lambda, int dim, int radius) {
  if (radius < 2) throw ConfigError("Psi truncation radius must be >= 2", {}, "R");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0", {}, "lambda");
  PsiOperator psi{dim, radius, lambda, {}};
  const BoxIndexer box(dim, radius);
  SparseOperator& op = psi.op;
  op.cols.reserve(box.size() * static_cast<std::size_t>(2 * dim + 1));
  op.vals.reserve(op.cols.capacity());
  SiteCoord e1(static_cast<std::size_t>(dim), 0);
  e1[0] = 1;
  RowBuilder row(op);
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (i == box.origin()) {
      row.add(i, 1.0 - 2.0 * lambda * dim);
      row.add(box.index(e1), 4.0 * lambda * dim);
    } else {
      SiteCoord x = box.coord(i);
      row.add(i, -4.0 * lambda * dim);
      for (int a = 0; a < dim; ++a) {
        for (int s : {1, -1}) {
          x[static_cast<std::size_t>(a)] += s;
          if (box.contains(x)) row.add(box.index(x), 2.0 * lambda);
          x[static_cast<std::size_t>(a)] -= s;
        }
      }
    }
    row.finish();
  }
  return psi;
}

std::vector<double> evolve_J(double t, const PsiOperator& psi, const UniformizationOptions& options) {
  const std::vector<double> ones(psi.op.rows, 1.0);
  return expm_action(psi.op, ones, t, options);
}

std::vector<double> evolve_J(double t, double lambda, int dim, int radius, const UniformizationOptions& options) {
  return evolve_J(t, build_psi(lambda, dim, radius), options);
}

double psi_null_residual(const PsiOperator& psi, std::span<const double> k, int k_radius, double h) {
  if (k_radius < psi.radius) throw ConfigError("return table radius is smaller than the Psi ball", {}, "R");
  const BoxIndexer ball = psi.indexer();
  const BoxIndexer kbox(psi.dim, k_radius);
  if (k.size() != kbox.size()) throw InternalError("return table size does not match its radius");
  std::vector<double> lam(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) lam[i] = k[kbox.index(ball.coord(i))] + h;
  std::vector<double> out(ball.size());
  psi.op.apply(lam, out);
  double worst = 0.0;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    if (linf_norm(ball.coord(i)) < psi.radius) worst = std::max(worst, std::abs(out[i]));
  }
  return worst;
}

double check_eq23_positivity(double t, double lambda, const TorusGeometry& geom) {
  if (geom.n_sites() > 64) {
    throw ConfigError("positivity check uses dense exponentials and needs L^d <= 64, got " +
                          std::to_string(geom.n_sites()),
                      {}, "L");
  }
  if (!(t >= 0.0)) throw DomainError("t must be >= 0", {}, "t");
  if (t == 0.0) return 0.0;
  const Eigen::MatrixXd m = build_pair_generator(lambda, geom, PairKind::M_lambda).op.dense();
  const Eigen::MatrixXd c = build_pair_generator(lambda, geom, PairKind::C_lambda).op.dense();
  const Eigen::MatrixXd em = (t * m).exp();
  const Eigen::MatrixXd ec = (t * c).exp();
  return (em - ec).minCoeff();
}

SecondMomentBound second_moment_bound_table(double lambda, int dim, double gamma, double sup_norm) {
  const double h = (2.0 * lambda * dim * (2.0 * gamma - 1.0) - 1.0) / (1.0 + 2.0 * dim * lambda);
  if (!(h > 0.0)) {
    throw DomainError("h_lambda = " + std::to_string(h) + " is not positive: lambda is below the critical bound",
                      {}, "lambda");
  }
  const double factor = (1.0 + h) / h;
  return {h, factor, sup_norm * sup_norm * factor};
}

PairMomentEstimate mc_pair_moments(const TorusGeometry& geom, double lambda, std::span<const double> eta0,
                                   std::span<const double> t_list, std::uint64_t replicas, std::uint64_t seed,
                                   int workers) {
  if (replicas < 2) throw ConfigError("need at least 2 replicas", {}, "replicas");
  if (!std::is_sorted(t_list.begin(), t_list.end()) || (!t_list.empty() && t_list.front() < 0.0)) {
    throw ConfigError("t_list must be nondecreasing and >= 0", {}, "t_list");
  }
  const std::size_t n = geom.n_sites();
  const std::size_t pairs = n * n;
  const std::size_t nt = t_list.size();
  constexpr std::uint64_t kBlock = 64;
  const std::uint64_t n_blocks = (replicas + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> sums(n_blocks, std::vector<double>(2 * nt * pairs, 0.0));
  const std::vector<double> initial(eta0.begin(), eta0.end());
  parallel_for(n_blocks, workers, [&](std::size_t blk) {
    std::vector<double>& acc = sums[blk];
    const std::uint64_t end = std::min(replicas, (blk + 1) * kBlock);
    for (std::uint64_t r = blk * kBlock; r < end; ++r) {
      ProcessState st(geom, lambda, initial, make_engine(seed, {r}));
      for (std::size_t ti = 0; ti < nt; ++ti) {
        st.advance(t_list[ti] - st.micro_time());
        const std::vector<double> eta = field_values(st);
        double* s1 = acc.data() + 2 * ti * pairs;
        double* s2 = s1 + pairs;
        for (std::size_t x = 0; x < n; ++x) {
          for (std::size_t y = 0; y < n; ++y) {
            const double p = eta[x] * eta[y];
            s1[x * n + y] += p;
            s2[x * n + y] += p * p;
          }
        }
      }
    }
  });
  PairMomentEstimate est{{t_list.begin(), t_list.end()}, {}, {}, replicas};
  const auto rn = static_cast<double>(replicas);
  for (std::size_t ti = 0; ti < nt; ++ti) {
    std::vector<double> mean(pairs, 0.0);
    std::vector<double> sq(pairs, 0.0);
    for (const auto& acc : sums) {
      for (std::size_t p = 0; p < pairs; ++p) {
        mean[p] += acc[2 * ti * pairs + p];
        sq[p] += acc[2 * ti * pairs + pairs + p];
      }
    }
    std::vector<double> se(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
      mean[p] /= rn;
      const double var = std::max(0.0, (sq[p] - rn * mean[p] * mean[p]) / (rn - 1.0));
      se[p] = std::sqrt(var / rn);
    }
    est.mean.push_back(std::move(mean));
    est.standard_error.push_back(std::move(se));
  }
  return est;
}

}  // namespace bcpp
