#pragma once
// Exact solution of the stopping problem by backward induction.
//
// For an intact drone at junction j after i rounds with picture value s,
// value(j, i, s) is the expected remaining mission value: the picture still
// to be banked at j, everything collected at later junctions and the drone
// sale at the end. Crashed states have no remaining value beyond the picture
// banked on the crash round.
//
//   stop(j, i, s) = s + value(j + 1, 0, 0)          (value(J + 1, 0, 0) = D)
//   fly(j, i, s)  = q * branch(next(s)) + (1 - q) * branch(s)
//   branch(t)     = (1 - r) * value(j, i + 1, t) + r * t
//
// with q = 1 on the first round and q = p afterwards. Flying is only allowed
// below the round cap and below the ladder top; ties go to stopping.

#include <span>
#include <string>
#include <vector>

#include "uavstop/mission.hpp"
#include "uavstop/policy.hpp"

namespace uavstop {

class DpTable {
 public:
  const MissionConfig& config() const { return cfg_; }

  // States are (junction 1..J, rounds 0..N, sigma on the ladder) with sigma
  // attainable after that many rounds. Accessors throw DomainError outside.
  bool contains(int junction, int rounds, Taler sigma) const;
  double value(int junction, int rounds, Taler sigma) const;
  double stop_value(int junction, int rounds, Taler sigma) const;
  // -infinity where flying is not allowed.
  double fly_value(int junction, int rounds, Taler sigma) const;
  bool fly(int junction, int rounds, Taler sigma) const;

  // Expected total value of the optimal policy from the mission start.
  double expected_total() const { return value(1, 0, 0); }

 private:
  friend DpTable solve_dp(const MissionConfig& cfg);

  std::size_t offset(int junction, int rounds, Taler sigma) const;

  struct Cell {
    bool reachable = false;
    double stop = 0.0;
    double fly = 0.0;
    double value = 0.0;
    bool fly_action = false;
  };

  const Cell& cell(int junction, int rounds, Taler sigma) const;

  MissionConfig cfg_;
  std::vector<Cell> cells_;
};

// Throws ConfigError for an invalid configuration.
DpTable solve_dp(const MissionConfig& cfg);

// Largest |value - max(stop, fly)| over all states, with stop and fly
// recomputed from the stored values of the successor states.
double bellman_residual(const DpTable& table);

// Throws DomainError if the context lies outside the table or lacks feedback.
bool dp_decide(const DpTable& table, const DecisionContext& ctx);

class DpPolicy final : public Policy {
 public:
  explicit DpPolicy(std::shared_ptr<const DpTable> table) : table_(std::move(table)) {}
  std::string name() const override { return "dp"; }
  bool needs_feedback() const override { return true; }
  bool decide(const DecisionContext& ctx, Rng&) override { return dp_decide(*table_, ctx); }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<DpPolicy>(*this); }

 private:
  std::shared_ptr<const DpTable> table_;
};

// A reachable intact state where the optimal action and the closed-loop
// heuristic differ.
struct Disagreement {
  int junction = 0;
  int rounds = 0;
  Taler sigma = 0;
  bool dp_fly = false;
  bool heuristic_fly = false;
};

std::vector<Disagreement> dp_vs_heuristic(const DpTable& table);

// Tab-separated: junction, rounds, sigma, stop, fly, value, action,
// heuristic. One line per state, fixed ordering and precision.
std::string export_dp_table(const DpTable& table);

}  // namespace uavstop
