#pragma once
// Live experiment sessions: treatment assignment, instructions and control
// questions, decision intake, questionnaire, price list, payoff.
//
// Phases move forward only:
//   instructions -> quiz -> flying -> questionnaire -> mpl -> done
// ("created" exists only inside create_session). A closed-loop crash or the
// last junction ends flying; an open-loop plan is flown in full on
// submission. Submitting the price list finalizes the session: it gets the
// next participant index, the payoff is computed and the session snapshot
// is written.
//
// Open-loop responses never carry picture values, increase flags or the
// drone state before the session is done; closed-loop responses only ever
// describe rounds already flown.
//
// Event log schema "uavstop.event/1", one JSON object per line:
//   {schema, session_id, seq, kind, payload, ts_ms}
// kinds: created, instructions_ack, quiz_answer, decision, flight_outcome,
//        plan_submitted, questionnaire, mpl_choice, payoff

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "uavstop/mission.hpp"
#include "uavstop/policy.hpp"
#include "uavstop/rng.hpp"
#include "uavstop/session_log.hpp"

namespace uavstop {

enum class Phase { created, instructions, quiz, flying, questionnaire, mpl, done };
const char* to_string(Phase p);

inline constexpr const char* kEventSchema = "uavstop.event/1";

struct EventRecord {
  std::string session_id;
  std::int64_t seq = 0;  // 1, 2, ... per session
  std::string kind;
  nlohmann::json payload;
  std::int64_t ts_ms = 0;
};

nlohmann::ordered_json to_json(const EventRecord& e);
// Throws ValidationError.
EventRecord event_from_json(const nlohmann::json& j);
std::vector<EventRecord> read_events_jsonl(std::istream& is);

// Rebuilds the mission of one session from its events and checks the log:
// strictly increasing sequence numbers, every fly decision paired with an
// outcome, and (when a payoff event exists) the recorded total value.
// Throws ValidationError on any inconsistency.
MissionLog replay_events(std::span<const EventRecord> events, const MissionConfig& cfg);

// Machine-readable failure of a service request.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(std::string code, int http_status, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), status_(http_status) {}
  const std::string& code() const { return code_; }
  int http_status() const { return status_; }

 private:
  std::string code_;
  int status_;
};

struct QuizItem {
  std::string id;
  std::string question;
  double answer = 0.0;
};

// The four control questions, answers taken from the configuration.
std::vector<QuizItem> control_questions(const MissionConfig& cfg);

struct ServiceOptions {
  MissionConfig mission;
  std::uint64_t seed = 1;
  // Empty: keep everything in memory. Otherwise events.jsonl and
  // sessions.jsonl are appended in this directory.
  std::filesystem::path data_dir;
  std::string instructions;  // empty: generated from the configuration
  std::function<std::int64_t()> clock;  // ms since epoch; default system clock
};

class ExperimentService {
 public:
  explicit ExperimentService(ServiceOptions opts);
  ~ExperimentService();
  ExperimentService(const ExperimentService&) = delete;
  ExperimentService& operator=(const ExperimentService&) = delete;

  const MissionConfig& config() const { return opts_.mission; }

  // Balanced random assignment unless a treatment is forced. Returns the
  // session state (phase instructions).
  nlohmann::json create_session(std::optional<Treatment> forced = std::nullopt);
  nlohmann::json state(const std::string& id) const;
  nlohmann::json ack_instructions(const std::string& id);
  // answers: object keyed by question id. Returns {passed, wrong: [ids],
  // wrong_indices: [...], phase}.
  nlohmann::json submit_quiz(const std::string& id, const nlohmann::json& answers);
  nlohmann::json decide_round(const std::string& id, bool fly);
  nlohmann::json submit_plan(const std::string& id, const nlohmann::json& plan);
  nlohmann::json submit_questionnaire(const std::string& id, const nlohmann::json& fields);
  nlohmann::json submit_mpl(const std::string& id, const nlohmann::json& choices);
  nlohmann::json result(const std::string& id) const;

  std::vector<EventRecord> events(const std::string& id) const;
  std::vector<SessionLog> completed_sessions() const;
  std::vector<std::string> session_ids() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  void log_event(Session& s, const std::string& kind, nlohmann::json payload);
  nlohmann::json state_locked(const Session& s) const;
  nlohmann::json result_locked(const Session& s) const;
  void finish_flying(Session& s);
  Treatment next_random_treatment();

  ServiceOptions opts_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::vector<std::string> order_;

  std::mutex assign_mu_;
  Rng assign_rng_;
  std::vector<Treatment> block_;
  std::uint64_t created_ = 0;

  mutable std::mutex finalize_mu_;
  std::int64_t next_index_ = 1;
  std::vector<SessionLog> completed_;

  std::mutex file_mu_;
  std::ofstream events_out_, sessions_out_;
};

}  // namespace uavstop
