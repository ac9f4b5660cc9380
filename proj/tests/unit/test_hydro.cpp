#include <doctest.h>

#include <cmath>
#include <vector>

#include "bcpp/errors.hpp"
#include "bcpp/hydro.hpp"
#include "bcpp/process.hpp"

using namespace bcpp;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.d = 2;
  cfg.lambda = 0.6;
  cfg.profile.kind = ProfileKind::gaussian_bump;
  cfg.profile.center = {0.0, 0.0};
  cfg.profile.width = 0.15;
  cfg.test_fn.center = {0.0, 0.0};
  cfg.test_fn.radius = 0.5;
  cfg.N_list = {4};
  cfg.t_list = {0.0, 0.05};
  cfg.replicas = 50;
  cfg.c_L = 5;
  return cfg;
}

}  // namespace

TEST_SUITE("hydro") {
  TEST_CASE("discrete Laplacian is exact on the quadratic core") {
    TestFunction g;
    g.kind = TestFunctionKind::polynomial_bump;
    g.center = {0.0, 0.0, 0.0};
    g.radius = 1.0;
    g.inner_radius = 0.5;
    const int x[] = {1, -2, 0};
    const double u[] = {1.0 / 16, -2.0 / 16, 0.0};
    CHECK(discrete_laplacian(g, 16, x) == doctest::Approx(g.laplacian(u)).epsilon(1e-10));
    const int far[] = {40, 0, 0};
    CHECK(discrete_laplacian(g, 16, far) == 0.0);
  }

  TEST_CASE("discrete Laplacian error is second order for the cosine bump") {
    TestFunction g;
    g.center = {0.0, 0.0, 0.0};
    g.radius = 1.0;
    double prev_c = 0.0;
    for (int n : {8, 16, 32}) {
      const int x[] = {n / 4, 0, n / 8};
      const double u[] = {0.25, 0.0, 0.125};
      const double c = std::abs(discrete_laplacian(g, n, x) - g.laplacian(u)) * n * n;
      if (prev_c > 0.0) CHECK(c == doctest::Approx(prev_c).epsilon(0.1));
      prev_c = c;
    }
  }

  TEST_CASE("t=0 rows are deterministic") {
    const ExperimentConfig cfg = small_config();
    const auto cells = simulate_cells(cfg, true);
    const auto rows = report_rows(cfg, cells);
    const TorusGeometry geom(2, 20);
    const ProcessState st = init_process(geom, 0.6, cfg.profile, 4, 1);
    CHECK(rows[0].variance == 0.0);
    CHECK(rows[0].mean_pairing == doctest::Approx(pair_with_empirical_measure(st, cfg.test_fn, 4)).epsilon(1e-14));
    const auto mart = martingale_rows(cfg, cells);
    CHECK(mart[0].mean == 0.0);
    CHECK(mart[0].variance == 0.0);
    const auto mass = mass_rows(cfg, cells);
    CHECK(mass[0].mean_mass == doctest::Approx(mass[0].initial_mass).epsilon(1e-14));
    CHECK(variance_rows(cfg, cells)[0].variance == 0.0);
  }

  TEST_CASE("constant profile keeps its pairing") {
    ExperimentConfig cfg = small_config();
    cfg.profile.kind = ProfileKind::constant_bump;
    cfg.profile.radius = 1.2;
    cfg.c_L = 5;
    cfg.t_list = {0.05};
    cfg.replicas = 200;
    cfg.N_list = {8};
    const auto rows = run_convergence_experiment(cfg);
    // Locally constant around supp G: target is c * int G.
    CHECK(std::abs(rows[0].mean_pairing - rows[0].target) <= 3.0 * rows[0].standard_error + 0.02 * rows[0].target);
  }

  TEST_CASE("workers do not change results") {
    ExperimentConfig cfg = small_config();
    cfg.replicas = 12;
    const auto a = simulate_cells(cfg, true);
    cfg.workers = 3;
    const auto b = simulate_cells(cfg, true);
    for (std::size_t r = 0; r < 12; ++r) {
      CHECK(a[0].replicas[r].pairing == b[0].replicas[r].pairing);
      CHECK(a[0].replicas[r].martingale == b[0].replicas[r].martingale);
    }
  }

  TEST_CASE("config validation") {
    ExperimentConfig cfg = small_config();
    cfg.lambda = -1.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("lambda"), ConfigError);
    cfg = small_config();
    cfg.c_L = 1;
    cfg.N_list = {2};
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("L >= 3"), ConfigError);
    cfg = small_config();
    cfg.c_L = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("envelope fit recovers an exact envelope") {
    std::vector<VarianceRow> rows;
    for (int n : {4, 8, 16}) rows.push_back({n, 0.1, 100, 0.01 + 2.0 * std::pow(n, -3.0), {0, 0}});
    const auto fits = fit_variance_envelope(rows, 3);
    REQUIRE(fits.size() == 1);
    CHECK(fits[0].c1 == doctest::Approx(0.01).epsilon(1e-10));
    CHECK(fits[0].c2 == doctest::Approx(2.0).epsilon(1e-10));
  }

  TEST_CASE("coupled torus control matches the uncoupled marginal") {
    ExperimentConfig cfg = small_config();
    cfg.t_list = {0.05};
    cfg.replicas = 200;
    const TorusControl c = torus_size_control(cfg, 4, 2, 0.05);
    CHECK(c.small_side == 20);
    CHECK(c.large_side == 40);
    const auto rows = run_convergence_experiment(cfg);
    const double se = std::hypot(c.se_small, rows[0].standard_error);
    CHECK(std::abs(c.mean_small - rows[0].mean_pairing) <= 4.0 * se);
    CHECK(std::abs(c.mean_large - c.mean_small) <= c.se_small);
  }
}
