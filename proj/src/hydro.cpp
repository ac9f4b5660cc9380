#include "bcpp/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/random/poisson_distribution.hpp>

#include "bcpp/errors.hpp"
#include "bcpp/lattice.hpp"
#include "bcpp/parallel.hpp"
#include "bcpp/process.hpp"
#include "bcpp/rng.hpp"

namespace bcpp {

void ExperimentConfig::validate() const {
  if (d < 1) throw ConfigError("d must be >= 1", {}, "d");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be > 0", {}, "lambda");
  if (N_list.empty()) throw ConfigError("N_list must not be empty", {}, "N_list");
  for (int n : N_list) {
    if (n < 1) throw ConfigError("every N must be >= 1", {}, "N_list");
    if (static_cast<long long>(c_L) * n < 3) {
      throw ConfigError("torus side L = c_L * N = " + std::to_string(c_L * n) + " violates the rule L >= 3", {}, "c_L");
    }
  }
  if (t_list.empty()) throw ConfigError("t_list must not be empty", {}, "t_list");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] >= 0.0) || !std::isfinite(t_list[i])) throw ConfigError("times must be finite and >= 0", {}, "t_list");
    if (i > 0 && t_list[i] < t_list[i - 1]) throw ConfigError("t_list must be nondecreasing", {}, "t_list");
  }
  if (replicas < 2) throw ConfigError("replicas must be >= 2", {}, "replicas");
  if (workers < 1) throw ConfigError("workers must be >= 1", {}, "workers");
  if (profile.dim() != d) throw ConfigError("profile center must have d components", {}, "profile.center");
  if (test_fn.dim() != d) throw ConfigError("test function center must have d components", {}, "test_fn.center");
  profile.validate();
  test_fn.validate();
  // Both supports must fit in the centered half of the torus, |u|_inf <= c_L / 4.
  const double half = c_L / 4.0;
  if (profile.height > 0.0 && profile.support_halfwidth() > half) {
    throw ConfigError("supp(rho_0) reaches " + std::to_string(profile.support_halfwidth()) +
                          " but must fit in half the torus (c_L / 4 = " + std::to_string(half) + ")",
                      {}, "c_L");
  }
  if (test_fn.support_halfwidth() > half) {
    throw ConfigError("supp(G) reaches " + std::to_string(test_fn.support_halfwidth()) +
                          " but must fit in half the torus (c_L / 4 = " + std::to_string(half) + ")",
                      {}, "c_L");
  }
}

namespace {

struct SparseWeights {
  std::vector<std::size_t> sites;
  std::vector<double> weights;

  double pair(const std::vector<double>& zeta, double scale) const {
    double s = 0.0;
    for (std::size_t i = 0; i < sites.size(); ++i) s += weights[i] * zeta[sites[i]];
    return s * scale;
  }
};

SparseWeights sparse(const std::vector<double>& w) {
  SparseWeights out;
  for (std::size_t x = 0; x < w.size(); ++x) {
    if (w[x] != 0.0) {
      out.sites.push_back(x);
      out.weights.push_back(w[x]);
    }
  }
  return out;
}

struct CellSetup {
  TorusGeometry geom;
  std::vector<double> initial;
  std::vector<double> pairing_w;
  SparseWeights pairing;
  std::vector<double> compensator_w;  // lambda N^{-d} sum_{y~x} [G(y/N) - G(x/N)]
  std::vector<double> qv_w;           // N^{-2d} [G(x/N)^2 + lambda sum_{y~x} G(y/N)^2]
};

CellSetup make_cell(const ExperimentConfig& cfg, int n, bool with_martingale) {
  TorusGeometry geom(cfg.d, cfg.side(n));
  CellSetup cell{geom, sample_profile(geom, cfg.profile, n), {}, {}, {}, {}};
  // G evaluated at every site; the pairing weights are N^{-d} G(x/N).
  cell.pairing_w = pairing_weights(geom, cfg.test_fn, n);
  cell.pairing = sparse(cell.pairing_w);
  if (with_martingale) {
    const double norm = std::pow(static_cast<double>(n), -cfg.d);
    const std::size_t sites = geom.n_sites();
    cell.compensator_w.assign(sites, 0.0);
    cell.qv_w.assign(sites, 0.0);
    for (std::size_t x = 0; x < sites; ++x) {
      const double gx = cell.pairing_w[x] / norm;
      double diff = 0.0;
      double sq = 0.0;
      for (int k = 0; k < geom.degree(); ++k) {
        const double gy = cell.pairing_w[geom.neighbor(x, k)] / norm;
        diff += gy - gx;
        sq += gy * gy;
      }
      cell.compensator_w[x] = cfg.lambda * norm * diff;
      cell.qv_w[x] = norm * norm * (gx * gx + cfg.lambda * sq);
    }
  }
  return cell;
}

ReplicaPath run_replica(const ExperimentConfig& cfg, const CellSetup& cell, int n, std::uint64_t replica,
                        bool with_martingale) {
  ProcessState st(cell.geom, cfg.lambda, cell.initial,
                  make_engine(cfg.master_seed, {static_cast<std::uint64_t>(n), replica}));
  ReplicaPath path;
  const double n2 = static_cast<double>(n) * n;
  TrackerId comp{0};
  TrackerId qv{0};
  double pairing0 = 0.0;
  if (with_martingale) {
    comp = st.track(cell.compensator_w, 1);
    qv = st.track(cell.qv_w, 2);
    pairing0 = cell.pairing.pair(st.field().zeta, std::exp(st.field().log_scale()));
  }
  for (double t : cfg.t_list) {
    st.advance(t * n2 - st.micro_time());
    const double scale = std::exp(st.field().log_scale());
    const double pairing = cell.pairing.pair(st.field().zeta, scale);
    path.pairing.push_back(pairing);
    path.mass.push_back(total_mass(st));
    if (with_martingale) {
      path.martingale.push_back(pairing - pairing0 - st.tracked_integral(comp));
      path.qv.push_back(st.tracked_integral(qv));
    }
  }
  return path;
}

template <class E>
[[noreturn]] void rethrow_annotated(const E& e, const std::string& where) {
  throw E(where + ": " + e.what());
}

}  // namespace

std::vector<CellSample> simulate_cells(const ExperimentConfig& cfg, bool with_martingale) {
  cfg.validate();
  std::vector<CellSample> out;
  for (int n : cfg.N_list) {
    const CellSetup cell = make_cell(cfg, n, with_martingale);
    CellSample sample{n, std::vector<ReplicaPath>(cfg.replicas)};
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
      const std::string where = "N=" + std::to_string(n) + ", replica=" + std::to_string(r);
      try {
        sample.replicas[r] = run_replica(cfg, cell, n, r, with_martingale);
      } catch (const DomainError& e) {
        throw DomainError(where + ": " + e.what(), e.line(), e.key());
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what(), e.line(), e.key());
      } catch (const NumericError& e) {
        rethrow_annotated(e, where);
      }
    });
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<double> heat_targets(const ExperimentConfig& cfg) {
  const HeatSolution rho(cfg.profile, cfg.lambda, cfg.quadrature.gh_order);
  std::vector<double> out;
  for (double t : cfg.t_list) out.push_back(heat_pairing(rho, cfg.test_fn, t, cfg.quadrature));
  return out;
}

namespace {

RunningStats stats_of(const CellSample& cell, std::size_t ti, std::vector<double> ReplicaPath::*field) {
  RunningStats s;
  for (const ReplicaPath& p : cell.replicas) s.add((p.*field)[ti]);
  return s;
}

}  // namespace

std::vector<ReportRow> report_rows(const ExperimentConfig& cfg, const std::vector<CellSample>& cells) {
  const std::vector<double> targets = heat_targets(cfg);
  std::vector<ReportRow> rows;
  for (const CellSample& cell : cells) {
    for (std::size_t ti = 0; ti < cfg.t_list.size(); ++ti) {
      const RunningStats s = stats_of(cell, ti, &ReplicaPath::pairing);
      rows.push_back({cell.N, cfg.t_list[ti], s.count(), s.mean(), s.variance(), targets[ti],
                      std::abs(s.mean() - targets[ti]), s.standard_error()});
    }
  }
  return rows;
}

std::vector<VarianceRow> variance_rows(const ExperimentConfig& cfg, const std::vector<CellSample>& cells) {
  std::vector<VarianceRow> rows;
  for (const CellSample& cell : cells) {
    for (std::size_t ti = 0; ti < cfg.t_list.size(); ++ti) {
      const RunningStats s = stats_of(cell, ti, &ReplicaPath::pairing);
      rows.push_back({cell.N, cfg.t_list[ti], s.count(), s.variance(), variance_interval(s.variance(), s.count())});
    }
  }
  return rows;
}

std::vector<MartingaleRow> martingale_rows(const ExperimentConfig& cfg, const std::vector<CellSample>& cells) {
  std::vector<MartingaleRow> rows;
  for (const CellSample& cell : cells) {
    if (!cell.replicas.empty() && cell.replicas.front().martingale.empty()) {
      throw InternalError("martingale rows requested from paths simulated without martingale tracking");
    }
    for (std::size_t ti = 0; ti < cfg.t_list.size(); ++ti) {
      const RunningStats m = stats_of(cell, ti, &ReplicaPath::martingale);
      const RunningStats q = stats_of(cell, ti, &ReplicaPath::qv);
      const double se = m.standard_error();
      rows.push_back({cell.N, cfg.t_list[ti], m.count(), m.mean(), m.variance(), q.mean(),
                      se > 0.0 ? m.mean() / se : 0.0});
    }
  }
  return rows;
}

std::vector<MassRow> mass_rows(const ExperimentConfig& cfg, const std::vector<CellSample>& cells) {
  std::vector<MassRow> rows;
  for (const CellSample& cell : cells) {
    const TorusGeometry geom(cfg.d, cfg.side(cell.N));
    double initial = 0.0;
    for (double v : sample_profile(geom, cfg.profile, cell.N)) initial += v;
    for (std::size_t ti = 0; ti < cfg.t_list.size(); ++ti) {
      const RunningStats s = stats_of(cell, ti, &ReplicaPath::mass);
      const double se = s.standard_error();
      rows.push_back({cell.N, cfg.t_list[ti], s.count(), s.mean(), initial, se,
                      se > 0.0 ? (s.mean() - initial) / se : 0.0});
    }
  }
  return rows;
}

std::vector<ReportRow> run_convergence_experiment(const ExperimentConfig& cfg) {
  return report_rows(cfg, simulate_cells(cfg, false));
}

std::vector<VarianceRow> variance_sweep(const ExperimentConfig& cfg) {
  return variance_rows(cfg, simulate_cells(cfg, false));
}

std::vector<MartingaleRow> martingale_diagnostics(const ExperimentConfig& cfg) {
  return martingale_rows(cfg, simulate_cells(cfg, true));
}

std::vector<MassRow> mass_conservation_check(const ExperimentConfig& cfg) {
  return mass_rows(cfg, simulate_cells(cfg, false));
}

std::vector<EnvelopeFit> fit_variance_envelope(const std::vector<VarianceRow>& rows, int d) {
  std::vector<double> times;
  for (const VarianceRow& r : rows) {
    if (std::find(times.begin(), times.end(), r.t) == times.end()) times.push_back(r.t);
  }
  std::vector<EnvelopeFit> fits;
  for (double t : times) {
    std::vector<double> x;
    std::vector<double> y;
    for (const VarianceRow& r : rows) {
      if (r.t == t) {
        x.push_back(std::pow(static_cast<double>(r.N), -d));
        y.push_back(r.variance);
      }
    }
    if (x.size() < 2) continue;
    const LineFit f = fit_line(x, y);
    fits.push_back({t, f.intercept, f.slope});
  }
  return fits;
}

namespace {

struct ScaledZeta {
  std::vector<double> zeta;
  double log_scale = 0.0;

  void add(std::size_t x, std::size_t y) {
    const double v = zeta[x] + zeta[y];
    zeta[x] = v;
    if (v > 1e200) {
      for (double& z : zeta) z *= 1e-100;
      log_scale += 100.0 * std::log(10.0);
    }
  }
};

}  // namespace

TorusControl torus_size_control(const ExperimentConfig& cfg, int n, int factor, double t) {
  cfg.validate();
  if (factor < 2) throw ConfigError("torus size factor must be >= 2", {}, "factor");
  if (!(t >= 0.0)) throw ConfigError("control time must be >= 0", {}, "t");
  const TorusGeometry small(cfg.d, cfg.side(n));
  const TorusGeometry large(cfg.d, factor * cfg.side(n));
  constexpr std::size_t kOutside = std::numeric_limits<std::size_t>::max();
  const int lo = -(small.side() / 2);
  const int hi = small.side() - 1 - small.side() / 2;
  std::vector<std::size_t> to_small(large.n_sites(), kOutside);
  for (std::size_t x = 0; x < large.n_sites(); ++x) {
    const SiteCoord c = large.coord_of_index(x);
    if (std::all_of(c.begin(), c.end(), [&](int v) { return v >= lo && v <= hi; })) to_small[x] = small.site_index(c);
  }
  const std::vector<double> small0 = sample_profile(small, cfg.profile, n);
  const std::vector<double> large0 = sample_profile(large, cfg.profile, n);
  const SparseWeights w_small = sparse(pairing_weights(small, cfg.test_fn, n));
  const SparseWeights w_large = sparse(pairing_weights(large, cfg.test_fn, n));

  const double branch = 1.0 + 2.0 * cfg.d * cfg.lambda;
  const double micro = t * n * n;
  const double drift = (1.0 - 2.0 * cfg.d * cfg.lambda) * micro;
  const double inv_lambda = 1.0 / cfg.lambda;
  const int last_dir = large.degree() - 1;
  std::vector<double> pair_small(cfg.replicas);
  std::vector<double> pair_large(cfg.replicas);
  parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
    // Tag 0x4c44 keeps these streams apart from the experiment paths.
    Engine rng = make_engine(cfg.master_seed, {static_cast<std::uint64_t>(n), r, std::uint64_t{0x4c44},
                                               static_cast<std::uint64_t>(factor)});
    ScaledZeta zs{small0};
    ScaledZeta zl{large0};
    const double mean = static_cast<double>(large.n_sites()) * branch * micro;
    const std::uint64_t count =
        mean > 0.0 ? boost::random::poisson_distribution<std::uint64_t, double>(mean)(rng) : 0;
    for (std::uint64_t k = 0; k < count; ++k) {
      double u = 0.0;
      const auto x = static_cast<std::size_t>(uniform_index_and_fraction(rng, large.n_sites(), u));
      const double v = u * branch;
      const std::size_t xs = to_small[x];
      if (v < 1.0) {
        zl.zeta[x] = 0.0;
        if (xs != kOutside) zs.zeta[xs] = 0.0;
      } else {
        const int dir = std::min(static_cast<int>((v - 1.0) * inv_lambda), last_dir);
        zl.add(x, large.neighbor(x, dir));
        if (xs != kOutside) zs.add(xs, small.neighbor(xs, dir));
      }
    }
    pair_small[r] = w_small.pair(zs.zeta, std::exp(drift + zs.log_scale));
    pair_large[r] = w_large.pair(zl.zeta, std::exp(drift + zl.log_scale));
  });
  RunningStats s;
  RunningStats l;
  RunningStats diff;
  for (std::size_t r = 0; r < cfg.replicas; ++r) {
    s.add(pair_small[r]);
    l.add(pair_large[r]);
    diff.add(pair_large[r] - pair_small[r]);
  }
  return {n, small.side(), large.side(), t, cfg.replicas, s.mean(), l.mean(), s.standard_error(),
          diff.standard_error()};
}

double discrete_laplacian(const TestFunction& g, int n, std::span<const int> x) {
  if (n < 1) throw ConfigError("scale N must be >= 1", {}, "N");
  if (static_cast<int>(x.size()) != g.dim()) throw ConfigError("site has the wrong dimension");
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = static_cast<double>(x[i]) / n;
  const double gx = g(u);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int sgn : {1, -1}) {
      u[i] = static_cast<double>(x[i] + sgn) / n;
      s += g(u) - gx;
    }
    u[i] = static_cast<double>(x[i]) / n;
  }
  return static_cast<double>(n) * n * s;
}

}  // namespace bcpp
