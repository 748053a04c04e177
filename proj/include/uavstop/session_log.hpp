#pragma once
// Complete record of one participant (human or synthetic), serialized as one
// JSON object per line. Live sessions and synthetic agents share this schema
// so the analysis pipeline cannot tell them apart.
//
// Schema "uavstop.session/1":
//   schema            "uavstop.session/1"
//   session_id        string
//   participant_code  8 characters [A-Z0-9]
//   participant_index integer >= 0 (arrival order of completed sessions)
//   treatment         "closed" | "open"
//   source            "human" | "synthetic"
//   agent             string, synthetic only (profile label)
//   rng               {algorithm: string, seed: unsigned}
//   config            mission parameters (see config_to_json)
//   quiz_attempts     integer >= 0
//   plan              array of num_junctions integers (open) | null
//   junctions         [{junction, end: "stopped"|"crashed", info, planned?,
//                       flights: [{round, increased, crashed, sigma_after}]}]
//   intact            bool
//   total_value       integer Taler
//   questionnaire     {age, gender, difficulty, strategy} | null
//   mpl               {choices: 20 x "A"|"B", paid: bool, row?, choice?,
//                      lottery_won?, amount_cents?} | null
//   payoff_cents      integer
//   created_ms, finished_ms  integers (0 for synthetic sessions)

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "uavstop/mission.hpp"
#include "uavstop/mpl.hpp"
#include "uavstop/policy.hpp"

namespace uavstop {

inline constexpr const char* kSessionSchema = "uavstop.session/1";

struct Questionnaire {
  std::optional<int> age;
  std::string gender;
  std::optional<int> difficulty;  // 1..7
  std::string strategy;

  friend bool operator==(const Questionnaire&, const Questionnaire&) = default;
};

struct MplRecord {
  std::vector<MplChoice> choices;
  std::optional<MplPayout> payout;  // set when this participant was paid
};

struct SessionLog {
  std::string session_id;
  std::string participant_code;
  std::int64_t participant_index = 0;
  Treatment treatment = Treatment::closed;
  std::string source = "human";
  std::string agent;
  std::uint64_t seed = 0;
  int quiz_attempts = 0;
  std::optional<OpenLoopPlan> plan;
  MissionLog mission;
  std::optional<Questionnaire> questionnaire;
  std::optional<MplRecord> mpl;
  Cents payoff;
  std::int64_t created_ms = 0;
  std::int64_t finished_ms = 0;
};

nlohmann::ordered_json config_to_json(const MissionConfig& cfg);
MissionConfig config_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const SessionLog& s);
// Throws ValidationError if the object does not follow the schema.
SessionLog session_from_json(const nlohmann::json& j);
// Schema check only. Throws ValidationError naming the offending field.
void validate_session_json(const nlohmann::json& j);

void write_sessions_jsonl(std::ostream& os, const std::vector<SessionLog>& sessions);
// Blank lines are skipped. Throws ValidationError with the line number.
std::vector<SessionLog> read_sessions_jsonl(std::istream& is);

}  // namespace uavstop
