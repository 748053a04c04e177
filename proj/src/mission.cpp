#include "uavstop/mission.hpp"

#include <algorithm>
#include <cstdio>

#include "uavstop/errors.hpp"

namespace uavstop {

std::string format_euro(Cents c) {
  const bool neg = c.value < 0;
  const std::int64_t v = neg ? -c.value : c.value;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", neg ? "-" : "", static_cast<long long>(v / 100),
                static_cast<long long>(v % 100));
  return buf;
}

RhoLadder RhoLadder::standard() { return RhoLadder({25, 25, 20, 10, 5, 5, 5, 5}); }

RhoLadder::RhoLadder(std::vector<Taler> increments) : increments_(std::move(increments)) {
  if (increments_.empty()) throw ConfigError("rho ladder: no increments");
  values_.reserve(increments_.size() + 1);
  values_.push_back(0);
  for (std::size_t k = 0; k < increments_.size(); ++k) {
    if (increments_[k] <= 0) throw ConfigError("rho ladder: increments must be positive");
    if (k > 0 && increments_[k] > increments_[k - 1])
      throw ConfigError("rho ladder: increments must be non-increasing");
    values_.push_back(values_.back() + increments_[k]);
  }
}

std::optional<std::size_t> RhoLadder::index_of(Taler v) const {
  const auto it = std::lower_bound(values_.begin(), values_.end(), v);
  if (it == values_.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - values_.begin());
}

bool RhoLadder::contains(Taler v) const { return index_of(v).has_value(); }

Taler RhoLadder::increment(Taler sigma) const {
  const auto idx = index_of(sigma);
  if (!idx) throw DomainError("value " + std::to_string(sigma) + " is not on the ladder");
  if (*idx == increments_.size()) throw DomainError("no increment defined at the top of the ladder");
  return increments_[*idx];
}

RhoLadder RhoLadder::scaled(Taler factor) const {
  if (factor <= 0) throw ConfigError("rho ladder: scale factor must be positive");
  std::vector<Taler> inc = increments_;
  for (auto& x : inc) x *= factor;
  return RhoLadder(std::move(inc));
}

void MissionConfig::validate() const {
  if (!(increase_prob >= 0.0 && increase_prob <= 1.0)) throw ConfigError("increase_prob must lie in [0, 1]");
  if (!(crash_prob >= 0.0 && crash_prob < 1.0)) throw ConfigError("crash_prob must lie in [0, 1)");
  if (num_junctions < 1) throw ConfigError("num_junctions must be >= 1");
  if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (drone_value < 0) throw ConfigError("drone_value must be >= 0");
  if (taler_per_euro <= 0) throw ConfigError("taler_per_euro must be > 0");
  if (mpl_payout_modulus < 1) throw ConfigError("mpl_payout_modulus must be >= 1");
}

Taler next_value(Taler sigma, const RhoLadder& rho) { return sigma + rho.increment(sigma); }

FlightDraw draw_flight(Rng& rng, const MissionConfig& cfg, int round) {
  const double u_increase = rng.uniform();
  const double u_crash = rng.uniform();
  return {round == 1 || u_increase < cfg.increase_prob, u_crash < cfg.crash_prob};
}

Taler running_value(const MissionState& state, const MissionConfig& cfg) {
  return (state.intact ? cfg.drone_value : 0) + state.banked_info + state.sigma;
}

FlightStep fly_once(const MissionState& state, const MissionConfig& cfg, const FlightDraw& draw) {
  if (!state.intact) throw ProtocolError("the drone has crashed");
  if (state.finished) throw ProtocolError("the mission has finished");
  if (state.rounds_flown_here >= cfg.max_rounds) throw ProtocolError("round cap reached at this junction");
  if (state.sigma >= cfg.rho.top()) throw ProtocolError("picture value already at its maximum");

  FlightStep step{state, {}};
  auto& out = step.outcome;
  out.junction = state.junction;
  out.round = state.rounds_flown_here + 1;
  out.increased = out.round == 1 ? true : draw.increase;
  out.sigma_after = out.increased ? next_value(state.sigma, cfg.rho) : state.sigma;
  out.crashed = draw.crash;

  auto& next = step.state;
  next.rounds_flown_here = out.round;
  next.sigma = out.sigma_after;
  if (out.crashed) {
    // The picture taken on the crash round still counts.
    next.intact = false;
    next.finished = true;
    next.banked_info += next.sigma;
    next.sigma = 0;
  }
  return step;
}

FlightStep fly_once(const MissionState& state, const MissionConfig& cfg, Rng& rng) {
  fly_once(state, cfg, FlightDraw{});  // throws before the stream is consumed
  return fly_once(state, cfg, draw_flight(rng, cfg, state.rounds_flown_here + 1));
}

MissionState end_junction(const MissionState& state, const MissionConfig& cfg) {
  if (!state.intact) throw ProtocolError("the drone has crashed");
  if (state.finished) throw ProtocolError("the mission has finished");
  MissionState next = state;
  next.banked_info += state.sigma;
  next.sigma = 0;
  next.rounds_flown_here = 0;
  if (state.junction >= cfg.num_junctions) {
    next.finished = true;
  } else {
    next.junction = state.junction + 1;
  }
  return next;
}

Taler mission_value(const MissionLog& log) {
  if (!log.finished) throw StateError("mission is not finished");
  Taler v = log.intact ? log.config.drone_value : 0;
  for (const auto& j : log.junctions) v += j.info;
  return v;
}

bool replay_consistent(const MissionLog& log) {
  Mission m(log.config);
  try {
    for (const auto& rec : log.junctions) {
      if (m.state().junction != rec.junction) return false;
      for (const auto& f : rec.flights) {
        if (m.fly(FlightDraw{f.increased, f.crashed}) != f) return false;
      }
      if (rec.end == JunctionEnd::stopped) m.stop();
      if (m.log().junctions.back() != rec) return false;
    }
  } catch (const std::logic_error&) {
    return false;
  }
  return m.log() == log;
}

Mission::Mission(MissionConfig cfg) {
  cfg.validate();
  log_.config = std::move(cfg);
}

FlightOutcome Mission::fly(const FlightDraw& draw) {
  auto step = fly_once(state_, log_.config, draw);
  state_ = step.state;
  current_.push_back(step.outcome);
  if (step.outcome.crashed) close_junction(step.outcome.junction, JunctionEnd::crashed, step.outcome.sigma_after);
  return step.outcome;
}

FlightOutcome Mission::fly(Rng& rng) {
  // validate first so that a rejected flight leaves the stream untouched
  fly_once(state_, log_.config, FlightDraw{});
  return fly(draw_flight(rng, log_.config, state_.rounds_flown_here + 1));
}

void Mission::stop() {
  const int junction = state_.junction;
  const Taler info = state_.sigma;
  state_ = end_junction(state_, log_.config);
  close_junction(junction, JunctionEnd::stopped, info);
}

void Mission::close_junction(int junction, JunctionEnd end, Taler info) {
  JunctionRecord rec;
  rec.junction = junction;
  rec.flights = std::move(current_);
  current_.clear();
  rec.info = info;
  rec.end = end;
  log_.junctions.push_back(std::move(rec));
  log_.intact = state_.intact;
  log_.finished = state_.finished;
  if (state_.finished) log_.total_value = mission_value(log_);
}

bool mpl_payout_due(std::int64_t participant_index, const MissionConfig& cfg) {
  return participant_index > 0 && participant_index % cfg.mpl_payout_modulus == 0;
}

Cents payoff_euro(Taler total_value, std::optional<Cents> mpl_outcome, std::int64_t participant_index,
                  const MissionConfig& cfg) {
  if (total_value < 0) throw DomainError("total value must be non-negative");
  if (participant_index < 0) throw DomainError("participant index must be non-negative");
  if (mpl_outcome && mpl_outcome->value < 0) throw DomainError("price-list outcome must be non-negative");
  // round(V * 100 / rate) half-up, in integers
  const std::int64_t rate = cfg.taler_per_euro;
  Cents c{(total_value * 200 + rate) / (2 * rate)};
  if (mpl_outcome && mpl_payout_due(participant_index, cfg)) c = c + *mpl_outcome;
  return c;
}

}  // namespace uavstop
