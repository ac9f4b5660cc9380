#include <doctest.h>

#include <cmath>
#include <vector>

#include "bcpp/errors.hpp"
#include "bcpp/process.hpp"
#include "bcpp/stats.hpp"

using namespace bcpp;

namespace {

DensityProfile box_profile(int d, double radius, double height) {
  DensityProfile p;
  p.kind = ProfileKind::constant_bump;
  p.center.assign(static_cast<std::size_t>(d), 0.0);
  p.radius = radius;
  p.height = height;
  return p;
}

DensityProfile gaussian(int d, double width) {
  DensityProfile p;
  p.kind = ProfileKind::gaussian_bump;
  p.center.assign(static_cast<std::size_t>(d), 0.0);
  p.width = width;
  return p;
}

TestFunction bump(int d, double radius) {
  TestFunction g;
  g.center.assign(static_cast<std::size_t>(d), 0.0);
  g.radius = radius;
  return g;
}

std::vector<double> ramp(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 0.5 + 0.25 * static_cast<double>(i % 4);
  return v;
}

}  // namespace

TEST_SUITE("process") {
  TEST_CASE("zero profile gives the zero field") {
    const TorusGeometry g(2, 6);
    const ProcessState st = init_process(g, 0.5, box_profile(2, 1.0, 0.0), 1, 1);
    for (double v : field_values(st)) CHECK(v == 0.0);
    CHECK(total_mass(st) == 0.0);
    CHECK(pair_with_empirical_measure(st, bump(2, 1.0), 1) == 0.0);
    for (auto x : project_contact(st)) CHECK(x == 0);
  }

  TEST_CASE("constant box profile at N=1") {
    const TorusGeometry g(2, 9);
    const ProcessState st = init_process(g, 0.5, box_profile(2, 2.0, 1.5), 1, 1);
    const auto eta = field_values(st);
    for (std::size_t x = 0; x < g.n_sites(); ++x) {
      const SiteCoord c = g.coord_of_index(x);
      CHECK(eta[x] == (linf_norm(c) <= 2 ? 1.5 : 0.0));
    }
  }

  TEST_CASE("gaussian profile sampled at x/N") {
    const TorusGeometry g(1, 80);
    const DensityProfile p = gaussian(1, 0.25);
    const ProcessState st = init_process(g, 0.5, p, 16, 1);
    const auto eta = field_values(st);
    for (std::size_t x = 0; x < g.n_sites(); ++x) {
      const double u[] = {g.coord_of_index(x)[0] / 16.0};
      CHECK(eta[x] == p(u));
    }
    const auto xi = project_contact(st);
    for (std::size_t x = 0; x < g.n_sites(); ++x) CHECK(xi[x] == (eta[x] > 0.0 ? 1 : 0));
  }

  TEST_CASE("profile support beyond the window is rejected") {
    const TorusGeometry g(1, 10);
    CHECK_THROWS_AS(init_process(g, 0.5, box_profile(1, 6.0, 1.0), 1, 1), ConfigError);
    CHECK_THROWS_AS(init_process(g, 0.0, box_profile(1, 1.0, 1.0), 1, 1), ConfigError);
    ProcessState st = init_process(g, 0.5, box_profile(1, 1.0, 1.0), 1, 1);
    CHECK_THROWS_AS(st.advance(-1.0), std::invalid_argument);
  }

  TEST_CASE("all-zero field is absorbing") {
    const TorusGeometry g(2, 5);
    ProcessState st(g, 0.7, std::vector<double>(g.n_sites(), 0.0), make_engine(1, {}));
    st.advance(3.0);
    CHECK(total_mass(st) == 0.0);
    CHECK(st.event_counts().deaths + st.event_counts().infections > 0);
  }

  TEST_CASE("fixed seed reproduces the path") {
    const TorusGeometry g(1, 5);
    auto run = [&](bool log) {
      ProcessState st(g, 0.5, ramp(5), make_engine(42, {}));
      st.record_events(log);
      st.advance(1.0);
      return st;
    };
    const ProcessState a = run(false);
    const ProcessState b = run(false);
    CHECK(field_values(a) == field_values(b));
    CHECK(a.event_counts().deaths == b.event_counts().deaths);
    CHECK(a.event_counts().infections == b.event_counts().infections);
    const ProcessState c = run(true);
    const ProcessState d = run(true);
    CHECK(field_values(c) == field_values(d));
    CHECK(c.event_log().size() == d.event_log().size());
  }

  TEST_CASE("event log replays to the final field") {
    const TorusGeometry g(2, 6);
    const std::vector<double> init = ramp(g.n_sites());
    ProcessState st(g, 0.6, init, make_engine(5, {1}));
    st.record_events(true);
    st.advance(2.0);
    std::vector<double> zeta = init;
    double last = 0.0;
    for (const Event& e : st.event_log()) {
      REQUIRE(e.time >= last);
      REQUIRE(e.time <= 2.0);
      last = e.time;
      if (e.type == EventType::death) {
        zeta[e.site] = 0.0;
      } else {
        const auto nb = g.neighbors(e.site);
        REQUIRE(std::find(nb.begin(), nb.end(), e.source) != nb.end());
        zeta[e.site] += zeta[e.source];
      }
    }
    const double scale = std::exp((1.0 - 2.0 * 0.6 * 2) * 2.0);
    const auto eta = field_values(st);
    for (std::size_t x = 0; x < zeta.size(); ++x) CHECK(eta[x] == doctest::Approx(zeta[x] * scale).epsilon(1e-12));
  }

  TEST_CASE("death fraction matches 1/(1+2d lambda)") {
    const TorusGeometry g(3, 6);
    const double lambda = 0.6;
    ProcessState st(g, lambda, std::vector<double>(g.n_sites(), 1.0), make_engine(8, {}));
    st.advance(20.0);
    const auto& c = st.event_counts();
    const double n = static_cast<double>(c.deaths + c.infections);
    const double p = 1.0 / (1.0 + 2.0 * 3 * lambda);
    const double z = (static_cast<double>(c.deaths) - n * p) / std::sqrt(n * p * (1.0 - p));
    CHECK(std::abs(z) < 4.0);
    // Poisson count of events in time 20.
    const double mean = st.total_rate() * 20.0;
    CHECK(std::abs(n - mean) < 4.0 * std::sqrt(mean));
  }

  TEST_CASE("timed and untimed paths agree in distribution") {
    const TorusGeometry g(1, 5);
    RunningStats untimed;
    RunningStats timed;
    for (std::uint64_t r = 0; r < 4000; ++r) {
      ProcessState a(g, 0.5, ramp(5), make_engine(21, {r}));
      a.advance(1.0);
      untimed.add(field_values(a)[0]);
      ProcessState b(g, 0.5, ramp(5), make_engine(22, {r}));
      b.record_events(true);
      b.advance(1.0);
      timed.add(field_values(b)[0]);
    }
    const double se = std::hypot(untimed.standard_error(), timed.standard_error());
    CHECK(std::abs(untimed.mean() - timed.mean()) < 4.0 * se);
  }

  TEST_CASE("no events leaves the pure drift") {
    // Tiny rate times a short interval: find a seed that draws no event.
    const TorusGeometry g(1, 3);
    const double lambda = 0.5;
    const double dt = 1e-3;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      ProcessState st(g, lambda, {1.0, 2.0, 3.0}, make_engine(seed, {}));
      st.advance(dt);
      if (st.event_counts().deaths + st.event_counts().infections > 0) continue;
      const auto eta = field_values(st);
      const double f = std::exp((1.0 - 2.0 * lambda) * dt);
      CHECK(eta[0] == doctest::Approx(1.0 * f).epsilon(1e-15));
      CHECK(eta[2] == doctest::Approx(3.0 * f).epsilon(1e-15));
      return;
    }
    FAIL("every seed drew an event");
  }

  TEST_CASE("lambda = 0 keeps the per-site mean") {
    const TorusGeometry g(3, 3);
    const std::vector<double> init = ramp(g.n_sites());
    std::vector<RunningStats> s(g.n_sites());
    for (std::uint64_t r = 0; r < 3000; ++r) {
      ProcessState st(g, 0.0, init, make_engine(31, {r}));
      st.advance(0.7);
      const auto eta = field_values(st);
      for (std::size_t x = 0; x < eta.size(); ++x) s[x].add(eta[x]);
    }
    int outside = 0;
    for (std::size_t x = 0; x < init.size(); ++x) outside += std::abs(s[x].mean() - init[x]) > 3.0 * s[x].standard_error();
    CHECK(outside <= 3);
  }

  TEST_CASE("total mass is conserved in expectation") {
    const TorusGeometry g(3, 8);
    const std::vector<double> init = ramp(g.n_sites());
    double m0 = 0.0;
    for (double v : init) m0 += v;
    RunningStats s;
    for (std::uint64_t r = 0; r < 400; ++r) {
      ProcessState st(g, 0.6, init, make_engine(41, {r}));
      st.advance(0.5);
      s.add(total_mass(st));
    }
    CHECK(std::abs(s.mean() - m0) <= 3.0 * s.standard_error());
  }

  TEST_CASE("pairing with a wide bump reduces to mass") {
    const TorusGeometry g(2, 12);
    ProcessState st = init_process(g, 0.5, box_profile(2, 0.25, 1.0), 4, 3);
    st.advance(0.5);
    TestFunction wide = bump(2, 100.0);
    wide.kind = TestFunctionKind::polynomial_bump;
    wide.inner_radius = 99.0;
    // G = 1 - r^2/(2 a^2) is within 1e-3 of 1 on the torus window.
    CHECK(pair_with_empirical_measure(st, wide, 4) == doctest::Approx(total_mass(st) / 16.0).epsilon(2e-3));
  }

  TEST_CASE("initial pairing is the direct sum") {
    const TorusGeometry g(2, 16);
    const DensityProfile p = gaussian(2, 0.2);
    const TestFunction gf = bump(2, 0.6);
    const ProcessState st = init_process(g, 0.5, p, 4, 3);
    double direct = 0.0;
    for (std::size_t x = 0; x < g.n_sites(); ++x) {
      const SiteCoord c = g.coord_of_index(x);
      const double u[] = {c[0] / 4.0, c[1] / 4.0};
      direct += p(u) * gf(u);
    }
    CHECK(pair_with_empirical_measure(st, gf, 4) == doctest::Approx(direct / 16.0).epsilon(1e-14));
  }

  TEST_CASE("trackers integrate the path exactly") {
    const TorusGeometry g(1, 5);
    const std::vector<double> init = ramp(5);
    ProcessState st(g, 0.5, init, make_engine(77, {}));
    st.record_events(true);
    std::vector<double> w = {1.0, 0.0, 2.0, 0.0, 0.5};
    const TrackerId lin = st.track(w, 1);
    const TrackerId sq = st.track(w, 2);
    st.advance(1.5);
    // Reference: integrate segment by segment from the event log.
    std::vector<double> zeta = init;
    const double drift = 1.0 - 2.0 * 0.5;
    double t0 = 0.0;
    double i1 = 0.0;
    double i2 = 0.0;
    auto seg = [&](double a, double b) {
      double s1 = 0.0;
      double s2 = 0.0;
      for (std::size_t x = 0; x < 5; ++x) {
        s1 += w[x] * zeta[x];
        s2 += w[x] * zeta[x] * zeta[x];
      }
      // drift = 0 here, so the field is constant between events.
      i1 += s1 * (b - a);
      i2 += s2 * (b - a);
    };
    CHECK(drift == 0.0);
    for (const Event& e : st.event_log()) {
      seg(t0, e.time);
      t0 = e.time;
      if (e.type == EventType::death) zeta[e.site] = 0.0;
      else zeta[e.site] += zeta[e.source];
    }
    seg(t0, 1.5);
    CHECK(st.tracked_integral(lin) == doctest::Approx(i1).epsilon(1e-12));
    CHECK(st.tracked_integral(sq) == doctest::Approx(i2).epsilon(1e-12));
    double v = 0.0;
    for (std::size_t x = 0; x < 5; ++x) v += w[x] * zeta[x];
    CHECK(st.tracked_value(lin) == doctest::Approx(v).epsilon(1e-12));
  }

  TEST_CASE("tracker exponential segments with drift") {
    // No events sampled: F(s) = F(0) exp(c s) integrates to F(0) expm1(c t)/c.
    const TorusGeometry g(1, 3);
    const double lambda = 0.9;
    const double dt = 1e-3;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      ProcessState st(g, lambda, {1.0, 2.0, 3.0}, make_engine(seed, {}));
      const TrackerId a = st.track({1.0, 1.0, 1.0}, 1);
      const TrackerId b = st.track({1.0, 0.0, 0.0}, 2);
      st.advance(dt);
      if (st.event_counts().deaths + st.event_counts().infections > 0) continue;
      const double c = 1.0 - 2.0 * lambda;
      CHECK(st.tracked_integral(a) == doctest::Approx(6.0 * std::expm1(c * dt) / c).epsilon(1e-13));
      CHECK(st.tracked_integral(b) == doctest::Approx(std::expm1(2.0 * c * dt) / (2.0 * c)).epsilon(1e-13));
      return;
    }
    FAIL("every seed drew an event");
  }

  TEST_CASE("renormalization preserves log values") {
    const TorusGeometry g(1, 3);
    ProcessState st(g, 50.0, {1.0, 1.0, 1.0}, make_engine(3, {}));
    st.record_events(true);
    st.advance(12.0);
    REQUIRE(st.event_counts().renormalizations > 0);
    std::vector<double> z = {1.0, 1.0, 1.0};
    double exponent = 0.0;
    for (const Event& e : st.event_log()) {
      if (e.type == EventType::death) {
        z[e.site] = 0.0;
      } else {
        z[e.site] += z[e.source];
        if (z[e.site] > 1e200) {
          for (double& v : z) v *= 1e-100;
          exponent += 100.0 * std::log(10.0);
        }
      }
    }
    const ScaledField& f = st.field();
    for (std::size_t x = 0; x < 3; ++x) {
      if (z[x] == 0.0) {
        CHECK(f.zeta[x] == 0.0);
        continue;
      }
      const double expected = std::log(z[x]) + exponent;
      CHECK(std::log(f.zeta[x]) + f.zeta_exponent == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}
