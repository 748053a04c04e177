#pragma once
// Mission dynamics of the surveillance drone.
//
// A mission visits `num_junctions` junctions in order. At each junction the
// operator flies up to `max_rounds` rounds; every round takes one picture.
// The combined picture value climbs a fixed ladder of attainable values
// (0, 25, 50, 70, 80, 85, 90, 95, 100 by default): the first picture at a
// junction always climbs one step, every later picture climbs with
// probability `increase_prob`. After each picture the drone crashes with
// probability `crash_prob`; the picture value collected so far is kept but
// the drone (worth `drone_value`) is lost and the mission ends.
//
// Total mission value: drone_value * intact + sum of per-junction values.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uavstop/rng.hpp"

namespace uavstop {

// Information value and money in the experimental currency. Always whole.
using Taler = std::int64_t;

// Euro amounts in whole cents.
struct Cents {
  std::int64_t value = 0;
  friend constexpr bool operator==(Cents, Cents) = default;
  friend constexpr auto operator<=>(Cents, Cents) = default;
  friend constexpr Cents operator+(Cents a, Cents b) { return {a.value + b.value}; }
};

// "9.17"
std::string format_euro(Cents c);

// Attainable picture values and the increment gained by the next successful
// picture at each of them. The value before the first picture is 0.
class RhoLadder {
 public:
  // 25, 25, 20, 10, 5, 5, 5, 5 -> {0, 25, 50, 70, 80, 85, 90, 95, 100}
  static RhoLadder standard();

  // Increments must be positive and non-increasing.
  explicit RhoLadder(std::vector<Taler> increments);

  const std::vector<Taler>& values() const { return values_; }
  const std::vector<Taler>& increments() const { return increments_; }
  std::size_t size() const { return values_.size(); }
  Taler top() const { return values_.back(); }

  bool contains(Taler v) const;
  // Position of `v` on the ladder, or nullopt if `v` is not attainable.
  std::optional<std::size_t> index_of(Taler v) const;
  // Throws DomainError at the top or off the ladder.
  Taler increment(Taler sigma) const;

  RhoLadder scaled(Taler factor) const;

  friend bool operator==(const RhoLadder&, const RhoLadder&) = default;

 private:
  std::vector<Taler> increments_;
  std::vector<Taler> values_;
};

struct MissionConfig {
  Taler drone_value = 400;
  double increase_prob = 0.5;
  double crash_prob = 0.02;
  int num_junctions = 10;
  int max_rounds = 8;
  RhoLadder rho = RhoLadder::standard();
  std::int64_t taler_per_euro = 120;
  std::int64_t mpl_payout_modulus = 15;

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const MissionConfig&, const MissionConfig&) = default;
};

// sigma + rho(sigma). Throws DomainError at the top of the ladder or off it.
Taler next_value(Taler sigma, const RhoLadder& rho);

// The two Bernoulli realizations of one round.
struct FlightDraw {
  bool increase = false;  // ignored on the first round of a junction
  bool crash = false;
};

// Consumes exactly two uniforms from `rng` regardless of the round, so the
// stream position depends only on the number of flights flown.
FlightDraw draw_flight(Rng& rng, const MissionConfig& cfg, int round);

struct FlightOutcome {
  int junction = 0;  // 1-based
  int round = 0;     // 1-based
  bool increased = false;
  bool crashed = false;
  Taler sigma_after = 0;

  friend bool operator==(const FlightOutcome&, const FlightOutcome&) = default;
};

struct MissionState {
  int junction = 1;
  int rounds_flown_here = 0;
  Taler sigma = 0;  // value of the open junction; 0 once it is closed
  bool intact = true;
  Taler banked_info = 0;  // sum of closed junction values
  bool finished = false;

  friend bool operator==(const MissionState&, const MissionState&) = default;
};

// D * intact + banked + sigma of the open junction.
Taler running_value(const MissionState& state, const MissionConfig& cfg);

struct FlightStep {
  MissionState state;
  FlightOutcome outcome;
};

// One round at the current junction. Throws ProtocolError after a crash,
// after the round cap, after the mission has finished, or at the ladder top.
FlightStep fly_once(const MissionState& state, const MissionConfig& cfg, const FlightDraw& draw);
FlightStep fly_once(const MissionState& state, const MissionConfig& cfg, Rng& rng);

// Bank the open junction and move to the next one (or finish the mission).
// Stopping with zero rounds flown is permitted and banks 0.
MissionState end_junction(const MissionState& state, const MissionConfig& cfg);

enum class JunctionEnd { stopped, crashed };

struct JunctionRecord {
  int junction = 0;
  std::vector<FlightOutcome> flights;
  Taler info = 0;
  JunctionEnd end = JunctionEnd::stopped;

  friend bool operator==(const JunctionRecord&, const JunctionRecord&) = default;
};

struct MissionLog {
  MissionConfig config;
  std::vector<JunctionRecord> junctions;  // closed junctions, in order
  bool intact = true;
  bool finished = false;
  Taler total_value = 0;

  friend bool operator==(const MissionLog&, const MissionLog&) = default;
};

// Total value of a finished mission, recomputed from the junction records.
// Throws StateError for an unfinished mission.
Taler mission_value(const MissionLog& log);

// Re-runs the recorded increase/crash realizations through the dynamics and
// checks every recorded value. Returns false on the first mismatch.
bool replay_consistent(const MissionLog& log);

// Stateful wrapper that keeps the state and its log in step.
class Mission {
 public:
  explicit Mission(MissionConfig cfg);

  const MissionConfig& config() const { return log_.config; }
  const MissionState& state() const { return state_; }
  const MissionLog& log() const { return log_; }
  const std::vector<FlightOutcome>& current_flights() const { return current_; }
  bool finished() const { return state_.finished; }

  FlightOutcome fly(const FlightDraw& draw);
  FlightOutcome fly(Rng& rng);
  void stop();

 private:
  void close_junction(int junction, JunctionEnd end, Taler info);

  MissionState state_;
  MissionLog log_;
  std::vector<FlightOutcome> current_;
};

// Payoff in euros: V / taler_per_euro rounded half-up to cents, plus the
// price-list outcome when the participant index is a positive multiple of
// mpl_payout_modulus. Throws DomainError on negative inputs.
Cents payoff_euro(Taler total_value, std::optional<Cents> mpl_outcome, std::int64_t participant_index,
                  const MissionConfig& cfg);

bool mpl_payout_due(std::int64_t participant_index, const MissionConfig& cfg);

}  // namespace uavstop
