#include <doctest.h>

#include <cmath>
#include <vector>

#include "../support/oracles.hpp"
#include "bcpp/errors.hpp"
#include "bcpp/kernels.hpp"
#include "bcpp/process.hpp"
#include "bcpp/stats.hpp"

using namespace bcpp;

TEST_SUITE("kernels") {
  TEST_CASE("cycle kernel at t=0 is the point mass") {
    const auto p = cycle_kernel(0.0, 7, 0.4);
    CHECK(p[0] == 1.0);
    for (std::size_t j = 1; j < p.size(); ++j) CHECK(p[j] == 0.0);
  }

  TEST_CASE("cycle kernel is stochastic and symmetric") {
    for (int side : {3, 4, 5, 8, 11}) {
      for (double t : {0.1, 1.0, 7.0}) {
        const auto p = cycle_kernel(t, side, 0.6);
        double s = 0.0;
        for (double v : p) {
          CHECK(v >= 0.0);
          s += v;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
        for (int j = 1; j < side; ++j) CHECK(p[static_cast<std::size_t>(j)] == doctest::Approx(p[static_cast<std::size_t>(side - j)]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("L=4 closed form and dense oracle") {
    const double lambda = 0.5;
    const double t = 0.8;
    const auto p = cycle_kernel(t, 4, lambda);
    const double closed = (1.0 + 2.0 * std::exp(-2.0 * lambda * t) + std::exp(-4.0 * lambda * t)) / 4.0;
    CHECK(p[0] == doctest::Approx(closed).epsilon(1e-13));
    const Eigen::MatrixXd e = testing::dense_expm(testing::walk_generator(TorusGeometry(1, 4), lambda), t);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(p[static_cast<std::size_t>(j)] - e(0, j)) < 1e-12);
  }

  TEST_CASE("torus kernel matches the dense exponential on d=2 L=5") {
    const TorusGeometry g(2, 5);
    const Eigen::MatrixXd e = testing::dense_expm(testing::walk_generator(g, 0.7), 0.3);
    const KernelTable k = make_kernel_table(0.3, g, 0.7);
    double worst = 0.0;
    for (std::size_t x = 0; x < g.n_sites(); ++x)
      for (std::size_t y = 0; y < g.n_sites(); ++y)
        worst = std::max(worst, std::abs(k.probability(x, y) - e(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y))));
    CHECK(worst < 1e-10);
    CHECK(torus_kernel(0.3, 3, 17, g, 0.7) == doctest::Approx(e(3, 17)).epsilon(1e-10));
  }

  TEST_CASE("torus kernel rows sum to one and t=0 is the identity") {
    const TorusGeometry g(3, 4);
    const KernelTable k = make_kernel_table(1.3, g, 0.6);
    const KernelTable id = make_kernel_table(0.0, g, 0.6);
    for (std::size_t x : {std::size_t{0}, std::size_t{5}, std::size_t{63}}) {
      double s = 0.0;
      for (std::size_t y = 0; y < g.n_sites(); ++y) {
        s += k.probability(x, y);
        CHECK(id.probability(x, y) == (x == y ? 1.0 : 0.0));
      }
      CHECK(std::abs(s - 1.0) < 1e-10);
    }
  }

  TEST_CASE("Chapman-Kolmogorov") {
    const TorusGeometry g(2, 5);
    const KernelTable a = make_kernel_table(0.4, g, 0.5);
    const KernelTable b = make_kernel_table(0.9, g, 0.5);
    const KernelTable ab = make_kernel_table(1.3, g, 0.5);
    for (std::size_t x : {std::size_t{0}, std::size_t{7}}) {
      for (std::size_t y = 0; y < g.n_sites(); ++y) {
        double s = 0.0;
        for (std::size_t z = 0; z < g.n_sites(); ++z) s += a.probability(x, z) * b.probability(z, y);
        CHECK(std::abs(s - ab.probability(x, y)) < 1e-12);
      }
    }
  }

  TEST_CASE("first moment keeps constants and the initial field") {
    const TorusGeometry g(2, 6);
    const std::vector<double> c(g.n_sites(), 2.5);
    for (double v : first_moment(c, 1.7, 0.4, g)) CHECK(v == doctest::Approx(2.5).epsilon(1e-13));
    std::vector<double> ramp(g.n_sites());
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
    CHECK(first_moment(ramp, 0.0, 0.4, g) == ramp);
  }

  TEST_CASE("first moment equals the kernel convolution") {
    const TorusGeometry g(2, 5);
    std::vector<double> init(g.n_sites());
    for (std::size_t i = 0; i < init.size(); ++i) init[i] = std::sin(static_cast<double>(i)) + 1.5;
    const auto m = first_moment(init, 0.6, 0.5, g);
    const KernelTable k = make_kernel_table(0.6, g, 0.5);
    for (std::size_t x = 0; x < g.n_sites(); ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < g.n_sites(); ++y) s += k.probability(x, y) * init[y];
      CHECK(m[x] == doctest::Approx(s).epsilon(1e-12));
    }
  }

  TEST_CASE("unit mass on the 5-cycle against the process") {
    const TorusGeometry g(1, 5);
    std::vector<double> init(5, 0.0);
    init[0] = 1.0;
    const auto row = first_moment(init, 1.0, 0.5, g);
    const auto p = cycle_kernel(1.0, 5, 0.5);
    std::vector<RunningStats> s(5);
    for (std::uint64_t r = 0; r < 20000; ++r) {
      ProcessState st(g, 0.5, init, make_engine(13, {r}));
      st.advance(1.0);
      const auto eta = field_values(st);
      for (std::size_t x = 0; x < 5; ++x) s[x].add(eta[x]);
    }
    for (std::size_t x = 0; x < 5; ++x) {
      CHECK(row[x] == doctest::Approx(p[x]).epsilon(1e-13));
      CHECK(std::abs(s[x].mean() - row[x]) <= 3.5 * s[x].standard_error());
    }
  }

  TEST_CASE("return probability: k(O)=1 and harmonic interior") {
    ReturnParams params;
    params.solve_radii = {12};
    const ReturnTable k = return_table(3, 4, ReturnMethod::linear_solve, params, 0);
    const int o[] = {0, 0, 0};
    CHECK(k.at(o) == 1.0);
    CHECK(k.k_e1() > 0.3);
    CHECK(k.k_e1() < 0.35);
    const ReturnTable box = solve_return_box(3, 12, 1e-13, 10000);
    CHECK(harmonic_residual(box) <= 1e-10);
  }

  TEST_CASE("return table rejects small solve radii") {
    ReturnParams params;
    params.solve_radii = {4};
    CHECK_THROWS_AS(return_table(3, 4, ReturnMethod::linear_solve, params, 0), ConfigError);
    params.solve_radii = {8, 12};
    CHECK_THROWS_AS(return_table(2, 4, ReturnMethod::linear_solve, params, 0), DomainError);
  }

  TEST_CASE("monte carlo return agrees with the same absorbing box") {
    ReturnParams params;
    params.walks = 40000;
    params.escape_radius = 8;
    const int e1[] = {1, 0, 0};
    const ReturnEstimate mc = mc_return_probability(3, e1, params, 5);
    const ReturnTable box = solve_return_box(3, 8, 1e-13, 10000);
    CHECK(std::abs(mc.k - box.k_e1()) <= 3.5 * mc.standard_error);
    params.workers = 3;
    const ReturnEstimate mc3 = mc_return_probability(3, e1, params, 5);
    CHECK(mc3.hits == mc.hits);
  }

  TEST_CASE("gamma and derived constants") {
    ReturnTable t;
    t.dim = 3;
    t.radius = 1;
    const BoxIndexer box = t.indexer();
    t.values.assign(box.size(), 1.0);
    CHECK(gamma_d(t) == 0.0);
    CHECK(lambda_critical_bound(1, 0.75) == doctest::Approx(1.0));
    CHECK(lambda_critical_bound(3, 0.6595) == doctest::Approx(0.5226).epsilon(1e-3));
    const double g = 0.6595;
    CHECK(h_lambda(lambda_critical_bound(3, g), 3, g).value == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(h_lambda(1.0, 3, g).value == doctest::Approx(0.1305).epsilon(1e-3));
    CHECK(h_lambda(0.6, 3, g).value == doctest::Approx(0.0322).epsilon(1e-2));
    CHECK_FALSE(h_lambda(0.4, 3, g).positive);
    double prev = -1.0;
    for (double lambda : {10.0, 100.0, 1000.0}) {
      const double h = h_lambda(lambda, 3, g).value;
      CHECK(h > prev);
      CHECK(h < 2.0 * g - 1.0);
      prev = h;
    }
    CHECK(std::abs(prev - (2.0 * g - 1.0)) < 1e-3);
    for (double gg : {0.55, 0.7, 0.9}) {
      for (int d : {1, 3, 5}) CHECK(lambda_critical_bound(d, gg) * 2.0 * d * (2.0 * gg - 1.0) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(h_lambda(1.0, 3, 0.5), DomainError);
    CHECK_THROWS_AS(lambda_critical_bound(3, 0.4), DomainError);
  }

  TEST_CASE("return method names round trip") {
    for (ReturnMethod m : {ReturnMethod::linear_solve, ReturnMethod::monte_carlo}) CHECK(parse_return_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_return_method("bogus"), ConfigError);
  }
}
