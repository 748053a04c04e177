#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "uavstop/mission.hpp"
#include "uavstop/policy.hpp"

namespace uavstop {

// One leaf of the outcome tree of a single junction.
struct JunctionBranch {
  Taler sigma = 0;  // value banked at the junction
  int flights = 0;
  bool crashed = false;
  double prob = 0.0;
};

// All terminal outcomes of junction `junction` for a drone that arrives there
// intact, by enumeration of every increase/crash path. Probabilities sum to 1.
// Throws UnsupportedError for randomized policies.
std::vector<JunctionBranch> junction_distribution(const Policy& policy, const MissionConfig& cfg, int junction);

struct ExactEvaluation {
  double expected_value = 0.0;     // E[V]
  double survival_prob = 0.0;      // P(intact at mission end)
  double expected_info = 0.0;      // E[sum of junction values]
  double expected_flights = 0.0;   // E[total flights]
  std::vector<double> reach_prob;  // P(junction j is reached intact), j = 1..J
};

// Exact expectation of the mission value, chaining the per-junction outcome
// distributions. Throws UnsupportedError for randomized policies.
ExactEvaluation evaluate_policy_exact(const Policy& policy, const MissionConfig& cfg);

struct PolicyStats {
  std::int64_t n_missions = 0;
  double mean_value = 0.0;
  double std_value = 0.0;  // sample standard deviation
  double std_error = 0.0;
  double mean_rounds_per_junction = 0.0;
  double mean_junctions_played = 0.0;
  double crash_rate = 0.0;
  std::map<Taler, std::int64_t> junction_info_counts;  // banked value -> junctions
};

// n independent missions; mission k uses dynamics and policy streams derived
// from (seed, k), so the result does not depend on `threads`.
PolicyStats simulate_missions(const Policy& policy, const MissionConfig& cfg, std::uint64_t seed,
                              std::int64_t n_missions, unsigned threads = 0);

}  // namespace uavstop
