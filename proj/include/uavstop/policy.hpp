#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uavstop/mission.hpp"
#include "uavstop/rng.hpp"

namespace uavstop {

enum class Treatment { closed, open };

const char* to_string(Treatment t);
// Throws ValidationError for anything but "closed" / "open".
Treatment parse_treatment(const std::string& s);

// What a decision maker can see before choosing to fly another round.
// Without feedback the picture value and the round history are masked.
struct DecisionContext {
  int junction = 1;
  int rounds_flown_here = 0;
  std::optional<Taler> sigma;
  bool intact = true;
  bool feedback_available = true;
  std::span<const FlightOutcome> history;  // flights at this junction so far
};

DecisionContext make_context(const MissionState& state, std::span<const FlightOutcome> history, bool feedback);

// Decision contract shared by heuristics, the DP table, synthetic agents and
// (through the experiment service) human participants.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  // Closed-loop policies read sigma and history; open-loop ones must not.
  virtual bool needs_feedback() const = 0;
  // Deterministic policies never draw from the policy stream.
  virtual bool deterministic() const { return true; }
  virtual void begin_junction(int /*junction*/, Rng& /*rng*/) {}
  virtual bool decide(const DecisionContext& ctx, Rng& rng) = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
  // Rounds per junction for open-loop policies.
  virtual std::optional<std::vector<int>> plan() const { return std::nullopt; }
};

struct OpenLoopPlan {
  std::vector<int> planned_rounds;

  // Throws ValidationError on wrong length or entries outside 0..max_rounds.
  void validate(const MissionConfig& cfg) const;
  friend bool operator==(const OpenLoopPlan&, const OpenLoopPlan&) = default;
};

// How the certain first picture enters the one-step gain at sigma = 0.
enum class FirstRound { uniform, certain };

// Expected one-round change of the running value: p * rho(sigma) - D * r
// (with success probability 1 at sigma = 0 under FirstRound::certain).
// Throws DomainError at the top of the ladder or off it.
double marginal_gain(Taler sigma, const MissionConfig& cfg, FirstRound first = FirstRound::certain);

// Smallest attainable value above 0 at which another round no longer has a
// positive marginal gain; the ladder top if there is none. 70 by default.
Taler myopic_threshold(const MissionConfig& cfg);

// Fly iff intact, below the round cap and below the myopic threshold.
// Throws ProtocolError when called without feedback.
bool closed_loop_decide(const DecisionContext& ctx, const MissionConfig& cfg);

// Rounds an open-loop planner attempts so that the expected number of
// increases reaches the myopic threshold: 1 + ceil((k - 1) / p), capped at
// max_rounds, where k is the threshold's ladder position. Five by default.
int open_loop_heuristic_rounds(const MissionConfig& cfg);
OpenLoopPlan open_loop_heuristic_plan(const MissionConfig& cfg);

class ClosedLoopHeuristic final : public Policy {
 public:
  explicit ClosedLoopHeuristic(MissionConfig cfg) : cfg_(std::move(cfg)) {}
  std::string name() const override { return "closed-heuristic"; }
  bool needs_feedback() const override { return true; }
  bool decide(const DecisionContext& ctx, Rng&) override { return closed_loop_decide(ctx, cfg_); }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<ClosedLoopHeuristic>(*this); }

 private:
  MissionConfig cfg_;
};

// Flies the planned number of rounds at every junction, blind to outcomes.
class PlanPolicy final : public Policy {
 public:
  PlanPolicy(OpenLoopPlan plan, std::string name = "plan");
  std::string name() const override { return name_; }
  bool needs_feedback() const override { return false; }
  bool decide(const DecisionContext& ctx, Rng&) override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<PlanPolicy>(*this); }
  std::optional<std::vector<int>> plan() const override { return plan_.planned_rounds; }

 private:
  OpenLoopPlan plan_;
  std::string name_;
};

std::unique_ptr<Policy> make_open_heuristic(const MissionConfig& cfg);
// Plan of max_rounds at every junction.
std::unique_ptr<Policy> make_always_fly_max(const MissionConfig& cfg);

// Runs one mission. The policy is consulted before every round; a request to
// fly where the rules forbid it (round cap, ladder top) ends the junction.
MissionLog run_mission(Policy& policy, const MissionConfig& cfg, Rng& dynamics, Rng& policy_rng);

}  // namespace uavstop
