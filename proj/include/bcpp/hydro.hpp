#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcpp/pde.hpp"
#include "bcpp/profiles.hpp"
#include "bcpp/stats.hpp"

namespace bcpp {

struct ExperimentConfig {
  int d = 3;
  double lambda = 0.6;
  DensityProfile profile;
  TestFunction test_fn;
  std::vector<int> N_list;
  std::vector<double> t_list;  // macroscopic times
  std::uint64_t replicas = 200;
  int c_L = 8;  // torus side L = c_L * N
  std::uint64_t master_seed = 1;
  std::string output = "out";
  int workers = 1;
  WeakQuadrature quadrature;

  int side(int n) const { return c_L * n; }
  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Per-replica observables, one entry per t in t_list. martingale and qv are
// filled only when requested.
struct ReplicaPath {
  std::vector<double> pairing;
  std::vector<double> mass;
  std::vector<double> martingale;
  std::vector<double> qv;
};

struct CellSample {
  int N;
  std::vector<ReplicaPath> replicas;
};

// One path per (N, replica), seeded from (master_seed, N, replica) and read
// off at every t. Replicas run on cfg.workers threads; results are stored by
// replica index.
std::vector<CellSample> simulate_cells(const ExperimentConfig& cfg, bool with_martingale);

struct ReportRow {
  int N;
  double t;
  std::uint64_t replicas;
  double mean_pairing;
  double variance;
  double target;
  double abs_error;
  double standard_error;
};

struct VarianceRow {
  int N;
  double t;
  std::uint64_t replicas;
  double variance;
  Interval ci;
};

struct MartingaleRow {
  int N;
  double t;
  std::uint64_t replicas;
  double mean;
  double variance;
  double predicted_qv;
  double z_mean;
};

struct MassRow {
  int N;
  double t;
  std::uint64_t replicas;
  double mean_mass;
  double initial_mass;
  double standard_error;
  double z;
};

// Target int rho(t,u) G(u) du, one per t in cfg.t_list.
std::vector<double> heat_targets(const ExperimentConfig& cfg);

std::vector<ReportRow> report_rows(const ExperimentConfig& cfg, const std::vector<CellSample>& cells);
std::vector<VarianceRow> variance_rows(const ExperimentConfig& cfg, const std::vector<CellSample>& cells);
std::vector<MartingaleRow> martingale_rows(const ExperimentConfig& cfg, const std::vector<CellSample>& cells);
std::vector<MassRow> mass_rows(const ExperimentConfig& cfg, const std::vector<CellSample>& cells);

std::vector<ReportRow> run_convergence_experiment(const ExperimentConfig& cfg);
std::vector<VarianceRow> variance_sweep(const ExperimentConfig& cfg);
std::vector<MartingaleRow> martingale_diagnostics(const ExperimentConfig& cfg);
std::vector<MassRow> mass_conservation_check(const ExperimentConfig& cfg);

// variance(N) = c1 + c2 N^{-d} by least squares over the rows at time t.
struct EnvelopeFit {
  double t;
  double c1;
  double c2;
};

std::vector<EnvelopeFit> fit_variance_envelope(const std::vector<VarianceRow>& rows, int d);

// Torus-size control: tori of side c_L N and factor * c_L N run from one event
// stream. Events on the large torus that land in its centered window of side
// c_L N are the events of the small torus (a thinned Poisson stream, uniform
// over the window), so each marginal is an exact path and the difference of
// pairings isolates the wrap-around effect.
struct TorusControl {
  int N;
  int small_side;
  int large_side;
  double t;
  std::uint64_t replicas;
  double mean_small;
  double mean_large;
  double se_small;
  double se_difference;
};

TorusControl torus_size_control(const ExperimentConfig& cfg, int n, int factor, double t);

// N^2 sum_{y ~ x} [G(y/N) - G(x/N)] on Z^d.
double discrete_laplacian(const TestFunction& g, int n, std::span<const int> x);

}  // namespace bcpp
