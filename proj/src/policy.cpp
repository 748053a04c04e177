#include "uavstop/policy.hpp"

#include <cmath>

#include "uavstop/errors.hpp"

namespace uavstop {

const char* to_string(Treatment t) { return t == Treatment::closed ? "closed" : "open"; }

Treatment parse_treatment(const std::string& s) {
  if (s == "closed") return Treatment::closed;
  if (s == "open") return Treatment::open;
  throw ValidationError("unknown treatment '" + s + "' (expected closed or open)");
}

DecisionContext make_context(const MissionState& state, std::span<const FlightOutcome> history, bool feedback) {
  DecisionContext ctx;
  ctx.junction = state.junction;
  ctx.rounds_flown_here = state.rounds_flown_here;
  ctx.intact = state.intact;
  ctx.feedback_available = feedback;
  if (feedback) {
    ctx.sigma = state.sigma;
    ctx.history = history;
  }
  return ctx;
}

void OpenLoopPlan::validate(const MissionConfig& cfg) const {
  if (planned_rounds.size() != static_cast<std::size_t>(cfg.num_junctions))
    throw ValidationError("plan must have " + std::to_string(cfg.num_junctions) + " entries, got " +
                          std::to_string(planned_rounds.size()));
  for (int r : planned_rounds)
    if (r < 0 || r > cfg.max_rounds)
      throw ValidationError("plan entries must lie in 0.." + std::to_string(cfg.max_rounds));
}

double marginal_gain(Taler sigma, const MissionConfig& cfg, FirstRound first) {
  const double rho = static_cast<double>(cfg.rho.increment(sigma));
  const double p = (sigma == 0 && first == FirstRound::certain) ? 1.0 : cfg.increase_prob;
  return p * rho - static_cast<double>(cfg.drone_value) * cfg.crash_prob;
}

Taler myopic_threshold(const MissionConfig& cfg) {
  const auto& values = cfg.rho.values();
  for (std::size_t k = 1; k + 1 < values.size(); ++k)
    if (marginal_gain(values[k], cfg) <= 0.0) return values[k];
  return cfg.rho.top();
}

bool closed_loop_decide(const DecisionContext& ctx, const MissionConfig& cfg) {
  if (!ctx.feedback_available || !ctx.sigma) throw ProtocolError("closed-loop rule needs feedback");
  return ctx.intact && ctx.rounds_flown_here < cfg.max_rounds && *ctx.sigma < myopic_threshold(cfg);
}

int open_loop_heuristic_rounds(const MissionConfig& cfg) {
  const auto k = static_cast<double>(*cfg.rho.index_of(myopic_threshold(cfg)));
  double rounds = 1.0;
  if (k > 1.0 && cfg.increase_prob > 0.0) rounds += std::ceil((k - 1.0) / cfg.increase_prob - 1e-12);
  return static_cast<int>(std::min<double>(rounds, cfg.max_rounds));
}

OpenLoopPlan open_loop_heuristic_plan(const MissionConfig& cfg) {
  cfg.validate();
  return {std::vector<int>(static_cast<std::size_t>(cfg.num_junctions), open_loop_heuristic_rounds(cfg))};
}

PlanPolicy::PlanPolicy(OpenLoopPlan plan, std::string name) : plan_(std::move(plan)), name_(std::move(name)) {}

bool PlanPolicy::decide(const DecisionContext& ctx, Rng&) {
  const auto j = static_cast<std::size_t>(ctx.junction - 1);
  if (j >= plan_.planned_rounds.size()) throw DomainError("junction outside plan");
  return ctx.intact && ctx.rounds_flown_here < plan_.planned_rounds[j];
}

std::unique_ptr<Policy> make_open_heuristic(const MissionConfig& cfg) {
  return std::make_unique<PlanPolicy>(open_loop_heuristic_plan(cfg), "open-heuristic");
}

std::unique_ptr<Policy> make_always_fly_max(const MissionConfig& cfg) {
  return std::make_unique<PlanPolicy>(
      OpenLoopPlan{std::vector<int>(static_cast<std::size_t>(cfg.num_junctions), cfg.max_rounds)}, "always-max");
}

MissionLog run_mission(Policy& policy, const MissionConfig& cfg, Rng& dynamics, Rng& policy_rng) {
  Mission mission(cfg);
  const bool feedback = policy.needs_feedback();
  while (!mission.finished()) {
    policy.begin_junction(mission.state().junction, policy_rng);
    while (true) {
      const auto& st = mission.state();
      const bool legal = st.rounds_flown_here < cfg.max_rounds && st.sigma < cfg.rho.top();
      const auto ctx = make_context(st, mission.current_flights(), feedback);
      if (!legal || !policy.decide(ctx, policy_rng)) {
        mission.stop();
        break;
      }
      if (mission.fly(dynamics).crashed) break;
    }
  }
  return mission.log();
}

}  // namespace uavstop
