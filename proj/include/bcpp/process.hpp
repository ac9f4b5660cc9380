#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bcpp/lattice.hpp"
#include "bcpp/profiles.hpp"
#include "bcpp/rng.hpp"

namespace bcpp {

// Process configuration stored as drift-free site values. The physical value
// is eta(x) = zeta(x) * exp(drift_exponent + zeta_exponent): the drift ODE
// d eta / ds = (1 - 2 lambda d) eta acts on every site alike, so one scalar
// carries it exactly.
struct ScaledField {
  std::vector<double> zeta;
  double drift_exponent = 0.0;  // (1 - 2 lambda d) * micro_time
  double zeta_exponent = 0.0;   // sum of overflow renormalizations
  double micro_time = 0.0;

  double log_scale() const { return drift_exponent + zeta_exponent; }
};

struct EventCounts {
  std::uint64_t deaths = 0;
  std::uint64_t infections = 0;
  std::uint64_t renormalizations = 0;
};

enum class EventType : std::uint8_t { death, infection };

struct Event {
  double time;
  EventType type;
  std::uint32_t site;
  std::uint32_t source;  // infecting neighbor; equals site for deaths
};

// Handle for a path functional registered with ProcessState::track.
struct TrackerId {
  std::size_t value;
};

// Binary contact path process on a torus, simulated exactly with the
// Gillespie direct method. Every site rings at rate 1 + 2 d lambda whatever
// its value, so the total rate is constant and event selection is O(1):
// a uniform site, then death with probability 1 / (1 + 2 d lambda), otherwise
// infection from a uniform neighbor.
class ProcessState {
 public:
  ProcessState(TorusGeometry geom, double lambda, std::vector<double> initial, Engine rng);

  const TorusGeometry& geometry() const { return geom_; }
  double lambda() const { return lambda_; }
  const ScaledField& field() const { return field_; }
  double micro_time() const { return field_.micro_time; }
  const EventCounts& event_counts() const { return counts_; }
  double drift_rate() const { return drift_rate_; }
  double total_rate() const { return static_cast<double>(geom_.n_sites()) * branch_total_; }

  // Evolves over [t, t + dt_micro]. Throws std::invalid_argument for dt < 0.
  void advance(double dt_micro);

  // Registers F(s) = sum_x weights[x] * eta_s(x)^power (power 1 or 2). The
  // running value and the exact integral of F over micro time since
  // registration are updated only at events touching weighted sites; between
  // events F is an exponential in s and is integrated in closed form.
  TrackerId track(std::vector<double> weights, int power);
  double tracked_value(TrackerId id) const;
  double tracked_integral(TrackerId id) const;

  void record_events(bool enabled) { log_events_ = enabled; }
  const std::vector<Event>& event_log() const { return log_; }

 private:
  struct Tracker {
    std::vector<double> weights;
    int power;
    double zeta_sum;       // sum_x w(x) zeta(x)^power
    double integral;       // physical units, up to last_time
    double last_time;
  };

  template <bool kTrack, bool kLog>
  void run_events(double t_end);
  void run_untimed(double t_end);
  void update_trackers(std::size_t site, double old_zeta, double new_zeta, double time);
  void flush_tracker(Tracker& tr, double time) const;
  void renormalize(double time);
  double log_scale_at(double time) const { return drift_rate_ * time + field_.zeta_exponent; }

  TorusGeometry geom_;
  double lambda_;
  double drift_rate_;
  double branch_total_;
  ScaledField field_;
  Engine rng_;
  EventCounts counts_;
  std::vector<Tracker> trackers_;
  bool log_events_ = false;
  std::vector<Event> log_;
};

// zeta(x) = rho_0(x / N) at centered coordinates. Throws ConfigError when the
// scaled support does not fit in the centered window of the torus.
std::vector<double> sample_profile(const TorusGeometry& geom, const DensityProfile& profile, int scale);

// Throws ConfigError unless lambda > 0 and N >= 1.
ProcessState init_process(const TorusGeometry& geom, double lambda, const DensityProfile& profile,
                          int scale, std::uint64_t seed);

std::vector<double> field_values(const ProcessState& state);
double total_mass(const ProcessState& state);

// <pi^N, G> = N^{-d} sum_x eta(x) G(x / N) over the centered torus window.
double pair_with_empirical_measure(const ProcessState& state, const TestFunction& g, int scale);

// N^{-d} G(x/N) for every site; the weight vector behind the pairing.
std::vector<double> pairing_weights(const TorusGeometry& geom, const TestFunction& g, int scale);

// Contact-process projection: 1 where eta(x) > 0.
std::vector<std::uint8_t> project_contact(const ProcessState& state);

}  // namespace bcpp
