#include "bcpp/process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/random/poisson_distribution.hpp>

#include "bcpp/errors.hpp"

namespace bcpp {

namespace {

// Renormalization keeps zeta (and zeta^2 for quadratic trackers) finite when
// the drift-free values grow without bound.
constexpr double kRenormThreshold = 1e200;
constexpr double kRenormThresholdQuadratic = 1e120;
constexpr double kRenormFactor = 1e-100;
const double kRenormLog = 100.0 * std::numbers::ln10;

}  // namespace

ProcessState::ProcessState(TorusGeometry geom, double lambda, std::vector<double> initial, Engine rng)
    : geom_(std::move(geom)),
      lambda_(lambda),
      drift_rate_(1.0 - 2.0 * lambda * geom_.dim()),
      branch_total_(1.0 + 2.0 * geom_.dim() * lambda),
      rng_(std::move(rng)) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("infection rate lambda must be >= 0", {}, "lambda");
  }
  if (initial.size() != geom_.n_sites()) {
    throw ConfigError("initial field has " + std::to_string(initial.size()) + " values, torus has " +
                      std::to_string(geom_.n_sites()) + " sites");
  }
  for (double v : initial) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("initial field values must be finite and >= 0");
  }
  field_.zeta = std::move(initial);
}

void ProcessState::advance(double dt_micro) {
  if (!(dt_micro >= 0.0)) throw std::invalid_argument("advance: dt must be >= 0");
  const double t_end = field_.micro_time + dt_micro;
  const bool track = !trackers_.empty();
  if (track && log_events_) {
    run_events<true, true>(t_end);
  } else if (track) {
    run_events<true, false>(t_end);
  } else if (log_events_) {
    run_events<false, true>(t_end);
  } else {
    run_untimed(t_end);
  }
  field_.micro_time = t_end;
  field_.drift_exponent = drift_rate_ * t_end;
  for (Tracker& tr : trackers_) {
    flush_tracker(tr, t_end);
    // Re-sum exactly so incremental rounding does not accumulate across calls.
    double s = 0.0;
    for (std::size_t x = 0; x < tr.weights.size(); ++x) {
      if (tr.weights[x] != 0.0) s += tr.weights[x] * (tr.power == 1 ? field_.zeta[x] : field_.zeta[x] * field_.zeta[x]);
    }
    tr.zeta_sum = s;
  }
}

template <bool kTrack, bool kLog>
void ProcessState::run_events(double t_end) {
  const std::uint64_t n = geom_.n_sites();
  const double rate = total_rate();
  const int last_dir = geom_.degree() - 1;
  const double inv_lambda = 1.0 / lambda_;
  bool quadratic = false;
  for (const Tracker& tr : trackers_) quadratic = quadratic || tr.power == 2;
  const double threshold = quadratic ? kRenormThresholdQuadratic : kRenormThreshold;

  std::vector<double>& zeta = field_.zeta;
  double t = field_.micro_time;
  while (true) {
    t += exponential(rng_, rate);
    // Exponential clocks are memoryless, so the overshoot is discarded.
    if (t > t_end) break;
    double u = 0.0;
    const auto x = static_cast<std::size_t>(uniform_index_and_fraction(rng_, n, u));
    const double v = u * branch_total_;
    if (v < 1.0) {
      ++counts_.deaths;
      if constexpr (kLog) log_.push_back({t, EventType::death, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(x)});
      const double old = zeta[x];
      if (old == 0.0) continue;
      zeta[x] = 0.0;
      if constexpr (kTrack) update_trackers(x, old, 0.0, t);
    } else {
      ++counts_.infections;
      const int dir = std::min(static_cast<int>((v - 1.0) * inv_lambda), last_dir);
      const std::size_t y = geom_.neighbor(x, dir);
      if constexpr (kLog) log_.push_back({t, EventType::infection, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)});
      const double add = zeta[y];
      if (add == 0.0) continue;
      const double old = zeta[x];
      const double updated = old + add;
      zeta[x] = updated;
      if constexpr (kTrack) update_trackers(x, old, updated, t);
      if (updated > threshold) renormalize(t);
    }
  }
}

// Without trackers or a log the event times are never observed. The number of
// events in the interval is Poisson and, given that number, the event choices
// are i.i.d., so the times need not be drawn at all.
void ProcessState::run_untimed(double t_end) {
  const double mean = total_rate() * (t_end - field_.micro_time);
  if (!(mean > 0.0)) return;
  const std::uint64_t count = boost::random::poisson_distribution<std::uint64_t, double>(mean)(rng_);
  const std::uint64_t n = geom_.n_sites();
  const int last_dir = geom_.degree() - 1;
  const double inv_lambda = 1.0 / lambda_;
  std::vector<double>& zeta = field_.zeta;
  std::uint64_t deaths = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    double u = 0.0;
    const auto x = static_cast<std::size_t>(uniform_index_and_fraction(rng_, n, u));
    const double v = u * branch_total_;
    if (v < 1.0) {
      ++deaths;
      zeta[x] = 0.0;
    } else {
      const int dir = std::min(static_cast<int>((v - 1.0) * inv_lambda), last_dir);
      const double updated = zeta[x] + zeta[geom_.neighbor(x, dir)];
      zeta[x] = updated;
      if (updated > kRenormThreshold) renormalize(field_.micro_time);
    }
  }
  counts_.deaths += deaths;
  counts_.infections += count - deaths;
}

void ProcessState::flush_tracker(Tracker& tr, double time) const {
  const double dt = time - tr.last_time;
  if (dt > 0.0 && tr.zeta_sum != 0.0) {
    const double rate = tr.power * drift_rate_;
    const double shape = rate == 0.0 ? dt : std::expm1(rate * dt) / rate;
    tr.integral += tr.zeta_sum * std::exp(tr.power * log_scale_at(tr.last_time)) * shape;
  }
  tr.last_time = time;
}

void ProcessState::update_trackers(std::size_t site, double old_zeta, double new_zeta, double time) {
  for (Tracker& tr : trackers_) {
    const double w = tr.weights[site];
    if (w == 0.0) continue;
    flush_tracker(tr, time);
    tr.zeta_sum += tr.power == 1 ? w * (new_zeta - old_zeta) : w * (new_zeta - old_zeta) * (new_zeta + old_zeta);
  }
}

void ProcessState::renormalize(double time) {
  for (Tracker& tr : trackers_) flush_tracker(tr, time);
  for (double& z : field_.zeta) z *= kRenormFactor;
  field_.zeta_exponent += kRenormLog;
  for (Tracker& tr : trackers_) tr.zeta_sum *= tr.power == 1 ? kRenormFactor : kRenormFactor * kRenormFactor;
  ++counts_.renormalizations;
}

TrackerId ProcessState::track(std::vector<double> weights, int power) {
  if (weights.size() != geom_.n_sites()) throw std::invalid_argument("tracker weights must cover every site");
  if (power != 1 && power != 2) throw std::invalid_argument("tracker power must be 1 or 2");
  double s = 0.0;
  for (std::size_t x = 0; x < weights.size(); ++x) {
    if (weights[x] != 0.0) s += weights[x] * (power == 1 ? field_.zeta[x] : field_.zeta[x] * field_.zeta[x]);
  }
  trackers_.push_back({std::move(weights), power, s, 0.0, field_.micro_time});
  return {trackers_.size() - 1};
}

double ProcessState::tracked_value(TrackerId id) const {
  const Tracker& tr = trackers_.at(id.value);
  return tr.zeta_sum * std::exp(tr.power * field_.log_scale());
}

double ProcessState::tracked_integral(TrackerId id) const { return trackers_.at(id.value).integral; }

std::vector<double> sample_profile(const TorusGeometry& geom, const DensityProfile& profile, int scale) {
  if (scale < 1) throw ConfigError("scale N must be >= 1", {}, "N");
  if (profile.dim() != geom.dim()) throw ConfigError("profile dimension does not match the torus", {}, "profile.center");
  profile.validate();
  const int window = geom.side() - 1 - geom.side() / 2;
  if (profile.height > 0.0 && profile.support_halfwidth() * scale > window) {
    throw ConfigError("support of rho_0 scaled by N=" + std::to_string(scale) + " reaches " +
                          std::to_string(profile.support_halfwidth() * scale) +
                          " sites, beyond the torus half-width " + std::to_string(window) +
                          " (increase L)",
                      {}, "L");
  }
  std::vector<double> out(geom.n_sites());
  std::vector<double> u(static_cast<std::size_t>(geom.dim()));
  for (std::size_t x = 0; x < out.size(); ++x) {
    const SiteCoord c = geom.coord_of_index(x);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<double>(c[i]) / scale;
    out[x] = profile(u);
  }
  return out;
}

ProcessState init_process(const TorusGeometry& geom, double lambda, const DensityProfile& profile, int scale,
                          std::uint64_t seed) {
  if (!(lambda > 0.0)) throw ConfigError("infection rate lambda must be > 0", {}, "lambda");
  return ProcessState(geom, lambda, sample_profile(geom, profile, scale), make_engine(seed, std::span<const std::uint64_t>{}));
}

std::vector<double> field_values(const ProcessState& state) {
  const ScaledField& f = state.field();
  const double scale = std::exp(f.log_scale());
  std::vector<double> out(f.zeta.size());
  std::transform(f.zeta.begin(), f.zeta.end(), out.begin(), [scale](double z) { return z * scale; });
  return out;
}

double total_mass(const ProcessState& state) {
  const ScaledField& f = state.field();
  double s = 0.0;
  for (double z : f.zeta) s += z;
  return s * std::exp(f.log_scale());
}

std::vector<double> pairing_weights(const TorusGeometry& geom, const TestFunction& g, int scale) {
  if (scale < 1) throw ConfigError("scale N must be >= 1", {}, "N");
  if (g.dim() != geom.dim()) throw ConfigError("test function dimension does not match the torus", {}, "test_fn.center");
  const double norm = std::pow(static_cast<double>(scale), -geom.dim());
  std::vector<double> w(geom.n_sites());
  std::vector<double> u(static_cast<std::size_t>(geom.dim()));
  for (std::size_t x = 0; x < w.size(); ++x) {
    const SiteCoord c = geom.coord_of_index(x);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<double>(c[i]) / scale;
    w[x] = norm * g(u);
  }
  return w;
}

double pair_with_empirical_measure(const ProcessState& state, const TestFunction& g, int scale) {
  const std::vector<double> w = pairing_weights(state.geometry(), g, scale);
  const ScaledField& f = state.field();
  double s = 0.0;
  for (std::size_t x = 0; x < w.size(); ++x) s += w[x] * f.zeta[x];
  return s * std::exp(f.log_scale());
}

std::vector<std::uint8_t> project_contact(const ProcessState& state) {
  const ScaledField& f = state.field();
  std::vector<std::uint8_t> xi(f.zeta.size());
  std::transform(f.zeta.begin(), f.zeta.end(), xi.begin(), [](double z) { return static_cast<std::uint8_t>(z > 0.0); });
  return xi;
}

}  // namespace bcpp
