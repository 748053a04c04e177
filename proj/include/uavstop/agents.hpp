#pragma once
// Synthetic decision makers with known behavioral ground truth.
//
//   optimizer        closed: myopic rule; open: heuristic plan
//   overconfident    reaches the threshold, then flies k more rounds
//                    (open: heuristic plan + k); k fixed or drawn per junction
//   underconfident   closed: stops once sigma >= stop_threshold (below the
//                    myopic threshold) or after max_flights; open: heuristic
//                    plan - short_rounds
//   hot_hand         closed only: myopic rule, except that after streak_len
//                    increases from the junction start it keeps flying at
//                    or above the threshold with probability q per round.
//                    With streak_response = stop it models the gambler's
//                    fallacy instead: it stops early after the streak with
//                    probability q.
//   open_loop_fixed  the same number of rounds at every junction

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uavstop/mission.hpp"
#include "uavstop/policy.hpp"
#include "uavstop/session_log.hpp"

namespace uavstop {

enum class BiasKind { optimizer, overconfident, underconfident, hot_hand, open_loop_fixed };
enum class StreakResponse { keep_flying, stop_flying };

const char* to_string(BiasKind k);
BiasKind parse_bias_kind(const std::string& s);

struct BiasProfile {
  BiasKind kind = BiasKind::optimizer;
  int extra_rounds = 1;
  std::optional<int> extra_rounds_max;  // k ~ uniform{extra_rounds..max} per junction
  Taler stop_threshold = 50;
  std::optional<int> max_flights;
  int short_rounds = 2;
  double hot_hand_continue_prob = 1.0;
  int streak_len = 3;
  StreakResponse streak_response = StreakResponse::keep_flying;
  int planned_rounds = 5;
  int mpl_switch_row = 17;  // price-list sheet: B before this row, A from it

  // Throws ConfigError.
  void validate(const MissionConfig& cfg) const;
  std::string label() const;
};

// Throws ConfigError for invalid profiles and for profiles that need
// feedback in the open-loop treatment.
std::unique_ptr<Policy> make_policy(const BiasProfile& profile, Treatment treatment, const MissionConfig& cfg);

// Advance plan of an open-loop agent. Draws from `rng` only when the profile
// randomizes the extra rounds.
OpenLoopPlan make_plan(const BiasProfile& profile, const MissionConfig& cfg, Rng& rng);

struct PopulationGroup {
  BiasProfile profile;
  int count = 0;
  Treatment treatment = Treatment::closed;
};

struct PopulationSpec {
  std::vector<PopulationGroup> groups;
  std::uint64_t seed = 0;
};

// One complete session per agent, in group order. Byte-identical output for
// identical (spec, cfg, seed).
std::vector<SessionLog> generate_sessions(const PopulationSpec& spec, const MissionConfig& cfg, std::uint64_t seed);

// Declarative population file. One entry per line, '#' starts a comment:
//
//   seed = 42
//   agent = optimizer closed 200
//   agent = overconfident closed 200 extra_rounds=2 extra_rounds_max=4
//   agent = hot_hand closed 100 q=0.5 streak_len=3 response=keep
//   agent = underconfident open 50 short_rounds=2 mpl_switch_row=12
//
// Agent options: extra_rounds, extra_rounds_max, stop_threshold, max_flights,
// short_rounds, q, streak_len, response (keep|stop), planned_rounds,
// mpl_switch_row. Throws ConfigError naming the line.
PopulationSpec parse_population(std::istream& is, const MissionConfig& cfg);

}  // namespace uavstop
