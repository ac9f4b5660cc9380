#include "bcpp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "bcpp/errors.hpp"
#include "bcpp/parallel.hpp"
#include "bcpp/rng.hpp"

namespace bcpp {

namespace {

constexpr double kClampTolerance = 1e-14;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Calls row(base) for every line of interior points along axis 0 in a padded
// grid of width `padded` (interior digits 1..padded-2 on every axis). base is
// the index of the first interior point of the line.
template <class RowFn>
void for_each_interior_row(int dim, std::size_t padded, RowFn&& row) {
  std::vector<std::size_t> digits(static_cast<std::size_t>(dim), 1);
  std::vector<std::size_t> strides(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) strides[static_cast<std::size_t>(i)] = ipow(padded, i);
  const std::size_t last = padded - 2;
  while (true) {
    std::size_t base = 1;
    for (int i = 1; i < dim; ++i) base += digits[static_cast<std::size_t>(i)] * strides[static_cast<std::size_t>(i)];
    row(base);
    int axis = 1;
    while (axis < dim) {
      auto& dgt = digits[static_cast<std::size_t>(axis)];
      if (dgt < last) {
        ++dgt;
        break;
      }
      dgt = 1;
      ++axis;
    }
    if (axis >= dim) return;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

std::vector<double> cycle_kernel(double t, int side, double lambda) {
  if (side < 3) throw ConfigError("cycle kernel needs L >= 3", {}, "L");
  if (!(t >= 0.0)) throw DomainError("kernel time must be >= 0", {}, "t");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0", {}, "lambda");
  std::vector<double> p(static_cast<std::size_t>(side), 0.0);
  if (t == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double two_pi_over_l = 2.0 * std::numbers::pi / side;
  std::vector<double> decay(static_cast<std::size_t>(side));
  for (int m = 0; m < side; ++m) {
    decay[static_cast<std::size_t>(m)] = std::exp(2.0 * lambda * t * (std::cos(two_pi_over_l * m) - 1.0));
  }
  for (int j = 0; j < side; ++j) {
    double s = 0.0;
    for (int m = 0; m < side; ++m) {
      // (m * j) mod L keeps the cosine argument small.
      s += decay[static_cast<std::size_t>(m)] * std::cos(two_pi_over_l * ((m * j) % side));
    }
    p[static_cast<std::size_t>(j)] = s / side;
  }
  bool clamped = false;
  for (double& v : p) {
    if (v < -kClampTolerance) {
      throw NumericError("cycle kernel entry " + std::to_string(v) + " below the clamp tolerance");
    }
    if (v < 0.0) {
      v = 0.0;
      clamped = true;
    }
  }
  if (clamped) {
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= total;
  }
  return p;
}

double KernelTable::probability(std::size_t from, std::size_t to) const {
  double p = 1.0;
  const int side = geom.side();
  std::size_t a = from;
  std::size_t b = to;
  for (int i = 0; i < geom.dim(); ++i) {
    const auto ca = static_cast<int>(a % static_cast<std::size_t>(side));
    const auto cb = static_cast<int>(b % static_cast<std::size_t>(side));
    a /= static_cast<std::size_t>(side);
    b /= static_cast<std::size_t>(side);
    p *= one_dim[static_cast<std::size_t>(((cb - ca) % side + side) % side)];
  }
  return p;
}

KernelTable make_kernel_table(double t, const TorusGeometry& geom, double lambda) {
  return {t, lambda, geom, cycle_kernel(t, geom.side(), lambda)};
}

double torus_kernel(double t, std::size_t from, std::size_t to, const TorusGeometry& geom, double lambda) {
  if (from >= geom.n_sites() || to >= geom.n_sites()) throw std::out_of_range("site index out of range");
  return make_kernel_table(t, geom, lambda).probability(from, to);
}

std::vector<double> first_moment(std::span<const double> initial, double t, double lambda,
                                 const TorusGeometry& geom) {
  if (initial.size() != geom.n_sites()) throw ConfigError("initial field size does not match the torus");
  const std::vector<double> p = cycle_kernel(t, geom.side(), lambda);
  const auto side = static_cast<std::size_t>(geom.side());
  std::vector<double> cur(initial.begin(), initial.end());
  std::vector<double> next(cur.size());
  std::vector<double> line(side);
  for (int axis = 0; axis < geom.dim(); ++axis) {
    const std::size_t stride = geom.stride(axis);
    for (std::size_t start = 0; start < cur.size(); ++start) {
      if ((start / stride) % side != 0) continue;
      for (std::size_t j = 0; j < side; ++j) line[j] = cur[start + j * stride];
      for (std::size_t i = 0; i < side; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < side; ++j) s += p[(j + side - i) % side] * line[j];
        next[start + i * stride] = s;
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

std::string_view to_string(ReturnMethod method) {
  return method == ReturnMethod::linear_solve ? "linear_solve" : "monte_carlo";
}

ReturnMethod parse_return_method(std::string_view name) {
  if (name == "linear_solve") return ReturnMethod::linear_solve;
  if (name == "monte_carlo") return ReturnMethod::monte_carlo;
  throw ConfigError("unknown return-table method '" + std::string(name) +
                    "' (expected linear_solve or monte_carlo)", {}, "method");
}

double ReturnTable::at(std::span<const int> x) const {
  const BoxIndexer box = indexer();
  if (!box.contains(x)) return 0.0;
  return values[box.index(x)];
}

std::size_t ReturnTable::e1_index() const {
  SiteCoord e1(static_cast<std::size_t>(dim), 0);
  e1[0] = 1;
  return indexer().index(e1);
}

double ReturnTable::k_e1() const { return values.at(e1_index()); }

ReturnTable solve_return_box(int dim, int solve_radius, double tolerance, int max_iterations) {
  if (dim < 1) throw ConfigError("dimension must be >= 1", {}, "d");
  if (solve_radius < 1) throw ConfigError("solve radius must be >= 1", {}, "R_solve");
  // Unknowns on |x|_inf <= R_s with a zero halo (k = 0 outside). The origin is
  // pinned: it is excluded from the system and enters through the right-hand
  // side, which leaves a symmetric positive definite Dirichlet problem.
  const std::size_t n = 2 * static_cast<std::size_t>(solve_radius) + 1;
  const std::size_t padded = n + 2;
  const std::size_t total = ipow(padded, dim);
  std::vector<std::size_t> strides(static_cast<std::size_t>(dim));
  std::size_t origin = 0;
  for (int i = 0; i < dim; ++i) {
    strides[static_cast<std::size_t>(i)] = ipow(padded, i);
    origin += (static_cast<std::size_t>(solve_radius) + 1) * strides[static_cast<std::size_t>(i)];
  }
  const double c = 1.0 / (2.0 * dim);

  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for_each_interior_row(dim, padded, [&](std::size_t base) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = base + j;
        double s = 0.0;
        for (std::size_t stride : strides) s += v[idx + stride] + v[idx - stride];
        out[idx] = v[idx] - c * s;
      }
    });
    out[origin] = v[origin];
  };

  std::vector<double> b(total, 0.0);
  for (std::size_t stride : strides) {
    b[origin + stride] = c;
    b[origin - stride] = c;
  }
  std::vector<double> x(total, 0.0);
  std::vector<double> r = b;
  std::vector<double> p = r;
  std::vector<double> ap(total, 0.0);
  double rr = dot(r, r);
  const double target = tolerance * std::sqrt(rr);
  int iter = 0;
  while (std::sqrt(rr) > target) {
    if (iter >= max_iterations) {
      throw NumericError("return-probability solve did not converge: residual " + std::to_string(std::sqrt(rr)) +
                         " after " + std::to_string(iter) + " iterations (R_solve=" + std::to_string(solve_radius) + ")");
    }
    apply(p, ap);
    const double alpha = rr / dot(p, ap);
    for (std::size_t i = 0; i < total; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < total; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_next;
    ++iter;
  }

  ReturnTable table;
  table.dim = dim;
  table.radius = solve_radius;
  table.method = ReturnMethod::linear_solve;
  table.solve_radii = {solve_radius};
  table.solver_iterations = iter;
  const BoxIndexer box(dim, solve_radius);
  table.values.resize(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    const SiteCoord cc = box.coord(i);
    std::size_t idx = 0;
    for (int a = 0; a < dim; ++a) {
      idx += static_cast<std::size_t>(cc[static_cast<std::size_t>(a)] + solve_radius + 1) * strides[static_cast<std::size_t>(a)];
    }
    table.values[i] = x[idx];
  }
  table.values[box.origin()] = 1.0;
  return table;
}

namespace {

ReturnTable crop(const ReturnTable& full, int radius) {
  ReturnTable out = full;
  out.radius = radius;
  const BoxIndexer box(full.dim, radius);
  out.values.assign(box.size(), 0.0);
  for (std::size_t i = 0; i < box.size(); ++i) out.values[i] = full.at(box.coord(i));
  return out;
}

}  // namespace

ReturnEstimate mc_return_probability(int dim, std::span<const int> start, const ReturnParams& params,
                                     std::uint64_t seed) {
  if (static_cast<int>(start.size()) != dim) throw ConfigError("start point has the wrong dimension");
  if (params.walks == 0) throw ConfigError("monte_carlo needs walks >= 1", {}, "walks");
  if (params.escape_radius < 1) throw ConfigError("escape radius must be >= 1", {}, "R_solve");
  if (std::all_of(start.begin(), start.end(), [](int v) { return v == 0; })) {
    return {1.0, 0.0, params.walks, params.walks};
  }
  constexpr std::uint64_t kBlock = 8192;
  const std::uint64_t n_blocks = (params.walks + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> ids;
  ids.push_back(0);  // block slot
  for (int v : start) ids.push_back(static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  std::vector<std::uint64_t> hits(n_blocks, 0);
  const int esc = params.escape_radius;
  const int n_dirs = 2 * dim;
  parallel_for(n_blocks, params.workers, [&](std::size_t blk) {
    std::vector<std::uint64_t> my_ids = ids;
    my_ids[0] = blk;
    Engine rng = make_engine(seed, my_ids);
    const std::uint64_t begin = blk * kBlock;
    const std::uint64_t end = std::min(params.walks, begin + kBlock);
    std::vector<int> pos(static_cast<std::size_t>(dim));
    std::uint64_t local = 0;
    for (std::uint64_t w = begin; w < end; ++w) {
      std::copy(start.begin(), start.end(), pos.begin());
      std::uint64_t steps = 0;
      while (true) {
        const auto dir = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n_dirs)));
        int& coord = pos[static_cast<std::size_t>(dir >> 1)];
        coord += (dir & 1) ? -1 : 1;
        if (coord > esc || coord < -esc) break;
        if (coord == 0 && std::all_of(pos.begin(), pos.end(), [](int v) { return v == 0; })) {
          ++local;
          break;
        }
        if (params.max_steps != 0 && ++steps >= params.max_steps) break;
      }
    }
    hits[blk] = local;
  });
  const std::uint64_t total_hits = std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
  const double k = static_cast<double>(total_hits) / static_cast<double>(params.walks);
  return {k, std::sqrt(k * (1.0 - k) / static_cast<double>(params.walks)), total_hits, params.walks};
}

ReturnTable return_table(int dim, int radius, ReturnMethod method, const ReturnParams& params,
                         std::uint64_t seed) {
  if (radius < 2) throw ConfigError("return table radius must be >= 2", {}, "R");
  if (method == ReturnMethod::linear_solve) {
    if (params.solve_radii.empty() || params.solve_radii.size() > 2) {
      throw ConfigError("linear_solve takes one solve radius or two for extrapolation", {}, "R_solve");
    }
    for (int rs : params.solve_radii) {
      if (rs <= radius) {
        throw ConfigError("solve radius R_solve=" + std::to_string(rs) + " must exceed the table radius R=" +
                              std::to_string(radius), {}, "R_solve");
      }
    }
    if (params.solve_radii.size() == 1) {
      return crop(solve_return_box(dim, params.solve_radii[0], params.tolerance, params.max_iterations), radius);
    }
    const int r1 = params.solve_radii[0];
    const int r2 = params.solve_radii[1];
    if (r1 == r2) throw ConfigError("extrapolation needs two distinct solve radii", {}, "R_solve");
    if (dim < 3) throw DomainError("extrapolation in R^{2-d} needs d >= 3", {}, "d");
    const ReturnTable a = crop(solve_return_box(dim, r1, params.tolerance, params.max_iterations), radius);
    const ReturnTable b = crop(solve_return_box(dim, r2, params.tolerance, params.max_iterations), radius);
    // The absorbing box lowers k by about c * R^{2-d}; cancel that term.
    const double w1 = std::pow(static_cast<double>(r1), dim - 2);
    const double w2 = std::pow(static_cast<double>(r2), dim - 2);
    ReturnTable out = b;
    out.solve_radii = {r1, r2};
    out.solver_iterations = a.solver_iterations + b.solver_iterations;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      out.values[i] = (w2 * b.values[i] - w1 * a.values[i]) / (w2 - w1);
    }
    out.values[out.indexer().origin()] = 1.0;
    return out;
  }

  ReturnTable table;
  table.dim = dim;
  table.radius = radius;
  table.method = ReturnMethod::monte_carlo;
  table.solve_radii = {params.escape_radius};
  if (params.escape_radius <= radius) {
    throw ConfigError("escape radius must exceed the table radius", {}, "R_solve");
  }
  const BoxIndexer box(dim, radius);
  table.values.assign(box.size(), 0.0);
  table.standard_error.assign(box.size(), 0.0);
  table.ci_halfwidth.assign(box.size(), 0.0);
  // k is invariant under coordinate permutations and sign flips: estimate one
  // representative (sorted absolute values) per orbit.
  std::vector<std::pair<SiteCoord, ReturnEstimate>> done;
  for (std::size_t i = 0; i < box.size(); ++i) {
    SiteCoord rep = box.coord(i);
    for (int& v : rep) v = std::abs(v);
    std::sort(rep.begin(), rep.end(), std::greater<>());
    auto it = std::find_if(done.begin(), done.end(), [&](const auto& e) { return e.first == rep; });
    if (it == done.end()) {
      done.emplace_back(rep, mc_return_probability(dim, rep, params, seed));
      it = done.end() - 1;
    }
    table.values[i] = it->second.k;
    table.standard_error[i] = it->second.standard_error;
    table.ci_halfwidth[i] = 1.96 * it->second.standard_error;
  }
  table.values[box.origin()] = 1.0;
  table.standard_error[box.origin()] = 0.0;
  table.ci_halfwidth[box.origin()] = 0.0;
  return table;
}

double harmonic_residual(const ReturnTable& table) {
  const BoxIndexer box = table.indexer();
  double worst = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) {
    SiteCoord x = box.coord(i);
    if (i == box.origin() || linf_norm(x) >= table.radius) continue;
    double s = 0.0;
    for (int a = 0; a < table.dim; ++a) {
      for (int sgn : {1, -1}) {
        x[static_cast<std::size_t>(a)] += sgn;
        s += table.values[box.index(x)];
        x[static_cast<std::size_t>(a)] -= sgn;
      }
    }
    worst = std::max(worst, std::abs(table.values[i] - s / (2.0 * table.dim)));
  }
  return worst;
}

double gamma_d(const ReturnTable& table) { return 1.0 - table.k_e1(); }

HLambda h_lambda(double lambda, int dim, double gamma) {
  if (!(gamma > 0.5)) throw DomainError("h_lambda needs gamma > 1/2, got " + std::to_string(gamma), {}, "gamma");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0", {}, "lambda");
  const double value = (2.0 * lambda * dim * (2.0 * gamma - 1.0) - 1.0) / (1.0 + 2.0 * dim * lambda);
  return {value, value > 0.0};
}

double lambda_critical_bound(int dim, double gamma) {
  if (!(gamma > 0.5)) {
    throw DomainError("critical bound needs gamma > 1/2, got " + std::to_string(gamma), {}, "gamma");
  }
  return 1.0 / (2.0 * dim * (2.0 * gamma - 1.0));
}

}  // namespace bcpp
