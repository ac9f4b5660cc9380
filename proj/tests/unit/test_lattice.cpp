#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "bcpp/errors.hpp"
#include "bcpp/lattice.hpp"
#include "bcpp/rng.hpp"

using namespace bcpp;

TEST_SUITE("lattice") {
  TEST_CASE("site index wraps periodically") {
    const TorusGeometry g(1, 5);
    const int zero[] = {0};
    const int five[] = {5};
    CHECK(g.site_index(zero) == 0);
    CHECK(g.site_index(five) == 0);
  }

  TEST_CASE("site index is a bijection on d=3 L=4") {
    const TorusGeometry g(3, 4);
    std::set<std::size_t> seen;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) {
          const int x[] = {a, b, c};
          seen.insert(g.site_index(x));
        }
    CHECK(seen.size() == 64);
    CHECK(*seen.rbegin() == 63);
  }

  TEST_CASE("negative coordinates reduce mod L") {
    const TorusGeometry g(2, 3);
    const int a[] = {-1, -1};
    const int b[] = {2, 2};
    CHECK(g.site_index(a) == g.site_index(b));
  }

  TEST_CASE("coord round trip in centered form") {
    const TorusGeometry g(3, 6);
    for (std::size_t i = 0; i < g.n_sites(); ++i) {
      const SiteCoord c = g.coord_of_index(i);
      for (int v : c) {
        CHECK(v >= -3);
        CHECK(v <= 2);
      }
      CHECK(g.site_index(c) == i);
    }
  }

  TEST_CASE("neighbors of the origin on the 5-cycle") {
    const TorusGeometry g(1, 5);
    const auto nb = g.neighbors(0);
    CHECK(std::set<std::size_t>(nb.begin(), nb.end()) == std::set<std::size_t>{1, 4});
  }

  TEST_CASE("six distinct neighbors in d=3 L=8") {
    const TorusGeometry g(3, 8);
    Engine rng = make_engine(7, {1});
    for (int k = 0; k < 50; ++k) {
      const auto x = static_cast<std::size_t>(uniform_index(rng, g.n_sites()));
      const auto nb = g.neighbors(x);
      CHECK(std::set<std::size_t>(nb.begin(), nb.end()).size() == 6);
      CHECK(std::find(nb.begin(), nb.end(), x) == nb.end());
    }
  }

  TEST_CASE("neighbor relation is symmetric on d=2 L=3") {
    const TorusGeometry g(2, 3);
    for (std::size_t x = 0; x < g.n_sites(); ++x) {
      for (std::size_t y : g.neighbors(x)) {
        const auto back = g.neighbors(y);
        CHECK(std::find(back.begin(), back.end(), x) != back.end());
      }
    }
  }

  TEST_CASE("fast neighbor matches coordinate arithmetic") {
    for (int side : {3, 4, 7, 10}) {
      const TorusGeometry g(3, side);
      for (std::size_t x = 0; x < g.n_sites(); ++x) {
        const SiteCoord c = g.coord_of_index(x);
        for (int dir = 0; dir < g.degree(); ++dir) {
          SiteCoord d = c;
          d[static_cast<std::size_t>(dir / 2)] += dir % 2 == 0 ? 1 : -1;
          REQUIRE(g.neighbor(x, dir) == g.site_index(d));
        }
      }
    }
  }

  TEST_CASE("fixed divisor agrees with integer division") {
    Engine rng = make_engine(3, {2});
    for (std::uint32_t d : {1u, 2u, 3u, 7u, 64u, 100u, 4096u, 262144u}) {
      const FixedDivisor f(d);
      for (int k = 0; k < 2000; ++k) {
        const auto a = static_cast<std::uint32_t>(rng() >> 40);
        REQUIRE(f.quotient(a) == a / d);
        REQUIRE(f.remainder(a) == a % d);
      }
    }
  }

  TEST_CASE("torus distance and displacement") {
    const TorusGeometry g(2, 5);
    const int a[] = {0, 0};
    const int b[] = {4, 2};
    CHECK(g.torus_l1_distance(g.site_index(a), g.site_index(b)) == 3);
    CHECK(g.displacement(g.site_index(a), g.site_index(b)) == SiteCoord{-1, 2});
  }

  TEST_CASE("invalid geometries are rejected") {
    CHECK_THROWS_AS(TorusGeometry(0, 5), ConfigError);
    CHECK_THROWS_AS(TorusGeometry(2, 2), ConfigError);
    const TorusGeometry g(2, 4);
    const int bad[] = {1};
    CHECK_THROWS_AS(g.site_index(bad), ConfigError);
  }

  TEST_CASE("box indexer order and origin") {
    const BoxIndexer box(3, 2);
    CHECK(box.size() == 125);
    CHECK(box.coord(box.origin()) == SiteCoord{0, 0, 0});
    for (std::size_t i = 0; i < box.size(); ++i) CHECK(box.index(box.coord(i)) == i);
    const int out[] = {3, 0, 0};
    CHECK_FALSE(box.contains(out));
    const int v[] = {-2, 1, 0};
    CHECK(linf_norm(v) == 2);
  }
}

TEST_SUITE("rng") {
  TEST_CASE("streams are reproducible and distinct") {
    Engine a = make_engine(11, {1, 2});
    Engine b = make_engine(11, {1, 2});
    Engine c = make_engine(11, {2, 1});
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }

  TEST_CASE("uniform draws stay in range") {
    Engine rng = make_engine(5, {});
    for (int k = 0; k < 10000; ++k) {
      const double u = uniform01(rng);
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      double f = 0.0;
      const auto i = uniform_index_and_fraction(rng, 17, f);
      REQUIRE(i < 17);
      REQUIRE(f >= 0.0);
      REQUIRE(f < 1.0);
      REQUIRE(exponential(rng, 2.0) >= 0.0);
    }
  }

  TEST_CASE("index and fraction are roughly independent and uniform") {
    Engine rng = make_engine(9, {4});
    const int n = 10;
    std::vector<double> sum(n, 0.0);
    std::vector<int> hits(n, 0);
    const int draws = 200000;
    for (int k = 0; k < draws; ++k) {
      double f = 0.0;
      const auto i = uniform_index_and_fraction(rng, n, f);
      ++hits[i];
      sum[i] += f;
    }
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(hits[i] - draws / n) < 5 * std::sqrt(draws / n));
      CHECK(std::abs(sum[i] / hits[i] - 0.5) < 0.01);
    }
  }
}
