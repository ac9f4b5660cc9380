#include "bcpp/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bcpp/errors.hpp"

namespace bcpp {

HeatSolution::HeatSolution(DensityProfile profile, double lambda, int order)
    : profile_(std::move(profile)), lambda_(lambda), order_(order) {
  if (order < 8) throw ConfigError("Gauss-Hermite order must be >= 8, got " + std::to_string(order), {}, "order");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0", {}, "lambda");
  profile_.validate();
  rule_ = gauss_hermite(order);
}

double HeatSolution::operator()(double t, std::span<const double> u) const {
  if (!(t >= 0.0)) throw DomainError("heat solution needs t >= 0", {}, "t");
  const int d = profile_.dim();
  if (static_cast<int>(u.size()) != d) throw ConfigError("evaluation point has the wrong dimension");
  if (t == 0.0) return profile_(u);
  // E f(Z) = pi^{-1/2} sum w_i f(sqrt(2) x_i) per coordinate.
  const double spread = std::sqrt(4.0 * lambda_ * t);
  const auto m = static_cast<std::size_t>(order_);
  std::vector<std::size_t> digit(static_cast<std::size_t>(d), 0);
  std::vector<double> v(u.begin(), u.end());
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)] + spread * rule_.nodes[0];
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < digit.size(); ++i) w *= rule_.weights[digit[i]];
    total += w * profile_(v);
    std::size_t axis = 0;
    while (axis < digit.size()) {
      if (++digit[axis] < m) {
        v[axis] = u[axis] + spread * rule_.nodes[digit[axis]];
        break;
      }
      digit[axis] = 0;
      v[axis] = u[axis] + spread * rule_.nodes[0];
      ++axis;
    }
    if (axis == digit.size()) break;
  }
  return total * std::pow(std::numbers::pi, -0.5 * d);
}

double heat_solution(const DensityProfile& profile, double t, std::span<const double> u, double lambda, int order) {
  if (!(t >= 0.0)) throw DomainError("heat solution needs t >= 0", {}, "t");
  return HeatSolution(profile, lambda, order)(t, u);
}

namespace {

QuadratureRule radial_rule(double radius, int order, double split) {
  if (split > 0.0 && split < radius) {
    QuadratureRule inner = composite_legendre(0.0, split, 1, order);
    const QuadratureRule outer = composite_legendre(split, radius, 1, order);
    inner.nodes.insert(inner.nodes.end(), outer.nodes.begin(), outer.nodes.end());
    inner.weights.insert(inner.weights.end(), outer.weights.begin(), outer.weights.end());
    return inner;
  }
  return composite_legendre(0.0, radius, 1, order);
}

}  // namespace

BallQuadrature ball_quadrature(std::span<const double> center, double radius, int radial_order, int angular_order,
                               double split) {
  const int d = static_cast<int>(center.size());
  if (d < 1) throw ConfigError("ball quadrature needs d >= 1");
  if (!(radius > 0.0)) throw ConfigError("ball radius must be > 0", {}, "radius");
  BallQuadrature q{d, {}, {}};
  auto push = [&](std::initializer_list<double> offset, double w) {
    auto it = offset.begin();
    for (int i = 0; i < d; ++i, ++it) q.points.push_back(center[static_cast<std::size_t>(i)] + *it);
    q.weights.push_back(w);
  };
  const QuadratureRule rad = radial_rule(radius, radial_order, split);
  const double two_pi = 2.0 * std::numbers::pi;
  if (d == 1) {
    for (std::size_t i = 0; i < rad.nodes.size(); ++i) {
      push({rad.nodes[i]}, rad.weights[i]);
      push({-rad.nodes[i]}, rad.weights[i]);
    }
  } else if (d == 2) {
    for (std::size_t i = 0; i < rad.nodes.size(); ++i) {
      const double r = rad.nodes[i];
      for (int k = 0; k < angular_order; ++k) {
        const double th = two_pi * k / angular_order;
        push({r * std::cos(th), r * std::sin(th)}, rad.weights[i] * r * two_pi / angular_order);
      }
    }
  } else if (d == 3) {
    const QuadratureRule polar = gauss_legendre(std::max(2, angular_order / 2));
    for (std::size_t i = 0; i < rad.nodes.size(); ++i) {
      const double r = rad.nodes[i];
      for (std::size_t j = 0; j < polar.nodes.size(); ++j) {
        const double ct = polar.nodes[j];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int k = 0; k < angular_order; ++k) {
          const double ph = two_pi * k / angular_order;
          push({r * st * std::cos(ph), r * st * std::sin(ph), r * ct},
               rad.weights[i] * r * r * polar.weights[j] * two_pi / angular_order);
        }
      }
    }
  } else {
    const QuadratureRule line = composite_legendre(-radius, radius, 4, std::max(2, radial_order / 2));
    const std::size_t m = line.nodes.size();
    std::vector<std::size_t> digit(static_cast<std::size_t>(d), 0);
    while (true) {
      double w = 1.0;
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double x = line.nodes[digit[static_cast<std::size_t>(i)]];
        w *= line.weights[digit[static_cast<std::size_t>(i)]];
        r2 += x * x;
      }
      if (r2 <= radius * radius) {
        for (int i = 0; i < d; ++i) {
          q.points.push_back(center[static_cast<std::size_t>(i)] + line.nodes[digit[static_cast<std::size_t>(i)]]);
        }
        q.weights.push_back(w);
      }
      std::size_t axis = 0;
      while (axis < digit.size() && ++digit[axis] == m) digit[axis++] = 0;
      if (axis == digit.size()) break;
    }
  }
  return q;
}

std::vector<double> GridSolution::cell_center(std::size_t index) const {
  std::vector<double> u(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    u[static_cast<std::size_t>(i)] = center(static_cast<int>(index % static_cast<std::size_t>(cells)));
    index /= static_cast<std::size_t>(cells);
  }
  return u;
}

double GridSolution::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * std::pow(step, dim);
}

namespace {

void heat_steps(GridSolution& grid, double duration, double lambda) {
  if (duration <= 0.0) return;
  const int d = grid.dim;
  const double h2 = grid.step * grid.step;
  const double dt_max = h2 / (4.0 * lambda * d);
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt_max));
  const double dt = duration / static_cast<double>(steps);
  const double c = lambda * dt / h2;
  const auto n = static_cast<std::size_t>(grid.cells);
  std::vector<std::size_t> strides(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) strides[static_cast<std::size_t>(i)] = i == 0 ? 1 : strides[static_cast<std::size_t>(i - 1)] * n;
  std::vector<double> next(grid.values.size());
  std::vector<double>& cur = grid.values;
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<std::size_t> digit(static_cast<std::size_t>(d), 0);
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
      double lap = 0.0;
      const double v = cur[idx];
      for (std::size_t a = 0; a < digit.size(); ++a) {
        // Zero flux: a missing neighbor contributes no difference.
        if (digit[a] > 0) lap += cur[idx - strides[a]] - v;
        if (digit[a] + 1 < n) lap += cur[idx + strides[a]] - v;
      }
      next[idx] = v + c * lap;
      for (std::size_t a = 0; a < digit.size(); ++a) {
        if (++digit[a] < n) break;
        digit[a] = 0;
      }
    }
    std::swap(cur, next);
  }
  grid.t += duration;
}

}  // namespace

GridSolution fd_heat_solver(const DensityProfile& profile, double t, double lambda, double grid_step,
                            double half_width, std::size_t max_cells) {
  if (!(t >= 0.0)) throw DomainError("t must be >= 0", {}, "t");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0", {}, "lambda");
  if (!(grid_step > 0.0)) throw ConfigError("grid step must be > 0", {}, "grid_step");
  profile.validate();
  const double needed = profile.support_halfwidth() + 4.0 * std::sqrt(2.0 * lambda * t);
  if (half_width < needed) {
    throw ConfigError("finite-difference box half-width " + std::to_string(half_width) + " is below supp(rho_0) + " +
                          "4 sqrt(2 lambda t) = " + std::to_string(needed),
                      {}, "box");
  }
  const int d = profile.dim();
  const auto cells = static_cast<int>(std::ceil(2.0 * half_width / grid_step));
  const double cells_total = std::pow(static_cast<double>(cells), d);
  if (cells_total > static_cast<double>(max_cells)) {
    throw ConfigError("finite-difference grid would have " + std::to_string(cells_total) + " cells", {}, "grid_step");
  }
  GridSolution grid{d, cells, grid_step, 0.5 * cells * grid_step, 0.0, {}};
  grid.values.resize(static_cast<std::size_t>(cells_total));
  for (std::size_t i = 0; i < grid.values.size(); ++i) grid.values[i] = profile(grid.cell_center(i));
  heat_steps(grid, t, lambda);
  return grid;
}

GridSolution fd_heat_continue(const GridSolution& start, double s, double lambda) {
  if (!(s >= 0.0)) throw DomainError("continuation time must be >= 0", {}, "t");
  GridSolution grid = start;
  heat_steps(grid, s, lambda);
  return grid;
}

namespace {

BallQuadrature test_function_quadrature(const TestFunction& g, const WeakQuadrature& quad) {
  const double split = g.kind == TestFunctionKind::polynomial_bump ? g.inner_radius : 0.0;
  return ball_quadrature(g.center, g.radius, quad.radial_order, quad.angular_order, split);
}

}  // namespace

double heat_pairing(const HeatSolution& rho, const TestFunction& g, double t, const WeakQuadrature& quad) {
  g.validate();
  const BallQuadrature q = test_function_quadrature(g, quad);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double gv = g(q.point(i));
    if (gv != 0.0) s += q.weights[i] * gv * rho(t, q.point(i));
  }
  return s;
}

WeakResidualTerms weak_residual_terms(const DensityProfile& profile, const TestFunction& g, double t, double lambda,
                                      int time_steps, const WeakQuadrature& quad) {
  if (!(t >= 0.0)) throw DomainError("t must be >= 0", {}, "t");
  g.validate();
  const HeatSolution rho(profile, lambda, quad.gh_order);
  const BallQuadrature q = test_function_quadrature(g, quad);
  std::vector<double> gv(q.size());
  std::vector<double> lap(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    gv[i] = g(q.point(i));
    lap[i] = g.laplacian(q.point(i));
  }
  auto integrate = [&](double s, const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (f[i] != 0.0) acc += q.weights[i] * f[i] * rho(s, q.point(i));
    }
    return acc;
  };
  WeakResidualTerms terms{};
  terms.initial_pairing = integrate(0.0, gv);
  if (t == 0.0) {
    terms.final_pairing = terms.initial_pairing;
    return terms;
  }
  terms.final_pairing = integrate(t, gv);
  const QuadratureRule time = simpson(0.0, t, time_steps);
  for (std::size_t k = 0; k < time.nodes.size(); ++k) {
    terms.laplacian_time_integral += time.weights[k] * integrate(time.nodes[k], lap);
  }
  return terms;
}

double weak_residual(const DensityProfile& profile, const TestFunction& g, double t, double lambda, int time_steps,
                     const WeakQuadrature& quad) {
  return weak_residual_terms(profile, g, t, lambda, time_steps, quad).residual(lambda);
}

}  // namespace bcpp
