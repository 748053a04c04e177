#pragma once
// Hand-built sessions from scripted flight draws.

#include <string>
#include <vector>

#include "uavstop/mission.hpp"
#include "uavstop/session_log.hpp"

namespace fixtures {

// One junction: the increase flag of each flight (the first is ignored by
// the dynamics), optionally crashing on the last one. Stops afterwards
// unless it crashed.
struct Path {
  std::vector<bool> increases;
  bool crash_last = false;
};

inline Path path(std::vector<bool> inc, bool crash = false) { return {std::move(inc), crash}; }

inline uavstop::MissionLog fly_paths(const std::vector<Path>& paths, const uavstop::MissionConfig& cfg = {}) {
  uavstop::Mission m(cfg);
  for (const auto& p : paths) {
    for (std::size_t k = 0; k < p.increases.size(); ++k)
      m.fly(uavstop::FlightDraw{p.increases[k], p.crash_last && k + 1 == p.increases.size()});
    if (m.finished()) break;
    m.stop();
  }
  return m.log();
}

inline uavstop::SessionLog closed_session(const std::vector<Path>& paths, std::int64_t index = 1,
                                          const uavstop::MissionConfig& cfg = {}) {
  uavstop::SessionLog s;
  s.session_id = "fx-" + std::to_string(index);
  s.participant_code = "FIXTURE0";
  s.participant_index = index;
  s.mission = fly_paths(paths, cfg);
  s.payoff = uavstop::payoff_euro(s.mission.total_value, std::nullopt, index, cfg);
  return s;
}

}  // namespace fixtures
