#include "uavstop/session_log.hpp"

#include <cctype>

#include "uavstop/errors.hpp"

namespace uavstop {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError("session." + field + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::int64_t get_int(const json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

double get_number(const json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

bool valid_code(const std::string& code) {
  if (code.size() != 8) return false;
  for (unsigned char c : code)
    if (!(std::isdigit(c) || (std::isupper(c) && std::isalpha(c)))) return false;
  return true;
}

}  // namespace

ordered_json config_to_json(const MissionConfig& cfg) {
  ordered_json j;
  j["drone_value"] = cfg.drone_value;
  j["increase_prob"] = cfg.increase_prob;
  j["crash_prob"] = cfg.crash_prob;
  j["num_junctions"] = cfg.num_junctions;
  j["max_rounds"] = cfg.max_rounds;
  j["rho_increments"] = cfg.rho.increments();
  j["taler_per_euro"] = cfg.taler_per_euro;
  j["mpl_payout_modulus"] = cfg.mpl_payout_modulus;
  return j;
}

MissionConfig config_from_json(const json& j) {
  const std::string p = "config";
  MissionConfig cfg;
  cfg.drone_value = get_int(j, "drone_value", p);
  cfg.increase_prob = get_number(j, "increase_prob", p);
  cfg.crash_prob = get_number(j, "crash_prob", p);
  cfg.num_junctions = static_cast<int>(get_int(j, "num_junctions", p));
  cfg.max_rounds = static_cast<int>(get_int(j, "max_rounds", p));
  const auto& inc = require(j, "rho_increments", p);
  if (!inc.is_array()) fail(p + ".rho_increments", "expected an array");
  try {
    cfg.rho = RhoLadder(inc.get<std::vector<Taler>>());
  } catch (const json::exception&) {
    fail(p + ".rho_increments", "expected integers");
  } catch (const ConfigError& e) {
    fail(p + ".rho_increments", e.what());
  }
  cfg.taler_per_euro = get_int(j, "taler_per_euro", p);
  cfg.mpl_payout_modulus = get_int(j, "mpl_payout_modulus", p);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    fail(p, e.what());
  }
  return cfg;
}

ordered_json to_json(const SessionLog& s) {
  ordered_json j;
  j["schema"] = kSessionSchema;
  j["session_id"] = s.session_id;
  j["participant_code"] = s.participant_code;
  j["participant_index"] = s.participant_index;
  j["treatment"] = to_string(s.treatment);
  j["source"] = s.source;
  if (!s.agent.empty()) j["agent"] = s.agent;
  j["rng"] = {{"algorithm", Rng::kAlgorithm}, {"seed", s.seed}};
  j["config"] = config_to_json(s.mission.config);
  j["quiz_attempts"] = s.quiz_attempts;
  j["plan"] = s.plan ? ordered_json(s.plan->planned_rounds) : ordered_json(nullptr);
  auto& junctions = j["junctions"] = ordered_json::array();
  for (const auto& rec : s.mission.junctions) {
    ordered_json jr;
    jr["junction"] = rec.junction;
    jr["end"] = rec.end == JunctionEnd::stopped ? "stopped" : "crashed";
    jr["info"] = rec.info;
    if (s.plan) jr["planned"] = s.plan->planned_rounds.at(static_cast<std::size_t>(rec.junction - 1));
    auto& flights = jr["flights"] = ordered_json::array();
    for (const auto& f : rec.flights)
      flights.push_back(
          {{"round", f.round}, {"increased", f.increased}, {"crashed", f.crashed}, {"sigma_after", f.sigma_after}});
    junctions.push_back(std::move(jr));
  }
  j["intact"] = s.mission.intact;
  j["total_value"] = s.mission.total_value;
  if (s.questionnaire) {
    const auto& q = *s.questionnaire;
    j["questionnaire"] = {{"age", q.age ? ordered_json(*q.age) : ordered_json(nullptr)},
                          {"gender", q.gender},
                          {"difficulty", q.difficulty ? ordered_json(*q.difficulty) : ordered_json(nullptr)},
                          {"strategy", q.strategy}};
  } else {
    j["questionnaire"] = nullptr;
  }
  if (s.mpl) {
    ordered_json m;
    m["choices"] = mpl_letters(s.mpl->choices);
    m["paid"] = s.mpl->payout.has_value();
    if (s.mpl->payout) {
      const auto& p = *s.mpl->payout;
      m["row"] = p.row;
      m["choice"] = p.choice == MplChoice::safe_a ? "A" : "B";
      m["lottery_won"] = p.lottery_won ? ordered_json(*p.lottery_won) : ordered_json(nullptr);
      m["amount_cents"] = p.amount.value;
    }
    j["mpl"] = std::move(m);
  } else {
    j["mpl"] = nullptr;
  }
  j["payoff_cents"] = s.payoff.value;
  j["created_ms"] = s.created_ms;
  j["finished_ms"] = s.finished_ms;
  return j;
}

SessionLog session_from_json(const json& j) {
  if (!j.is_object()) fail("", "expected a JSON object");
  if (get_string(j, "schema", "") != kSessionSchema) fail("schema", "unsupported schema");
  SessionLog s;
  s.session_id = get_string(j, "session_id", "");
  s.participant_code = get_string(j, "participant_code", "");
  if (!valid_code(s.participant_code)) fail("participant_code", "expected 8 characters A-Z or 0-9");
  s.participant_index = get_int(j, "participant_index", "");
  if (s.participant_index < 0) fail("participant_index", "must be >= 0");
  try {
    s.treatment = parse_treatment(get_string(j, "treatment", ""));
  } catch (const ValidationError& e) {
    fail("treatment", e.what());
  }
  s.source = get_string(j, "source", "");
  if (s.source != "human" && s.source != "synthetic") fail("source", "expected human or synthetic");
  if (j.contains("agent")) s.agent = get_string(j, "agent", "");
  const auto& rng = require(j, "rng", "");
  if (get_string(rng, "algorithm", "rng") != Rng::kAlgorithm) fail("rng.algorithm", "unsupported generator");
  const auto& seed = require(rng, "seed", "rng");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    fail("rng.seed", "expected an unsigned integer");
  s.seed = seed.get<std::uint64_t>();
  s.mission.config = config_from_json(require(j, "config", ""));
  const auto& cfg = s.mission.config;
  s.quiz_attempts = static_cast<int>(get_int(j, "quiz_attempts", ""));
  if (s.quiz_attempts < 0) fail("quiz_attempts", "must be >= 0");

  const auto& plan = require(j, "plan", "");
  if (!plan.is_null()) {
    if (!plan.is_array()) fail("plan", "expected an array or null");
    OpenLoopPlan p;
    for (const auto& x : plan) {
      if (!x.is_number_integer()) fail("plan", "expected integers");
      p.planned_rounds.push_back(x.get<int>());
    }
    try {
      p.validate(cfg);
    } catch (const ValidationError& e) {
      fail("plan", e.what());
    }
    s.plan = std::move(p);
  }
  if (s.treatment == Treatment::open && !s.plan) fail("plan", "open-loop sessions need a plan");
  if (s.treatment == Treatment::closed && s.plan) fail("plan", "closed-loop sessions have no plan");

  const auto& junctions = require(j, "junctions", "");
  if (!junctions.is_array()) fail("junctions", "expected an array");
  int expected_junction = 1;
  for (std::size_t k = 0; k < junctions.size(); ++k) {
    const std::string path = "junctions[" + std::to_string(k) + "]";
    const auto& jr = junctions[k];
    JunctionRecord rec;
    rec.junction = static_cast<int>(get_int(jr, "junction", path));
    if (rec.junction != expected_junction++) fail(path + ".junction", "junctions must be consecutive from 1");
    const auto end = get_string(jr, "end", path);
    if (end == "stopped")
      rec.end = JunctionEnd::stopped;
    else if (end == "crashed")
      rec.end = JunctionEnd::crashed;
    else
      fail(path + ".end", "expected stopped or crashed");
    rec.info = get_int(jr, "info", path);
    if (s.plan) {
      const auto planned = get_int(jr, "planned", path);
      if (planned != s.plan->planned_rounds.at(static_cast<std::size_t>(rec.junction - 1)))
        fail(path + ".planned", "disagrees with plan");
    }
    const auto& flights = require(jr, "flights", path);
    if (!flights.is_array()) fail(path + ".flights", "expected an array");
    for (std::size_t f = 0; f < flights.size(); ++f) {
      const std::string fp = path + ".flights[" + std::to_string(f) + "]";
      FlightOutcome o;
      o.junction = rec.junction;
      o.round = static_cast<int>(get_int(flights[f], "round", fp));
      o.increased = get_bool(flights[f], "increased", fp);
      o.crashed = get_bool(flights[f], "crashed", fp);
      o.sigma_after = get_int(flights[f], "sigma_after", fp);
      rec.flights.push_back(o);
    }
    s.mission.junctions.push_back(std::move(rec));
  }
  s.mission.intact = get_bool(j, "intact", "");
  s.mission.total_value = get_int(j, "total_value", "");
  s.mission.finished = !s.mission.intact || static_cast<int>(s.mission.junctions.size()) == cfg.num_junctions;
  if (!s.mission.finished) fail("junctions", "mission is not complete");
  if (mission_value(s.mission) != s.mission.total_value) fail("total_value", "does not match the junction values");
  if (!replay_consistent(s.mission)) fail("junctions", "flight records are inconsistent with the dynamics");
  if (s.plan) {
    for (const auto& rec : s.mission.junctions) {
      const int planned = s.plan->planned_rounds[static_cast<std::size_t>(rec.junction - 1)];
      const int flown = static_cast<int>(rec.flights.size());
      const bool capped = rec.end == JunctionEnd::crashed || rec.info == cfg.rho.top();
      if (flown > planned || (flown < planned && !capped)) fail("junctions", "flights do not follow the plan");
    }
  }

  const auto& q = require(j, "questionnaire", "");
  if (!q.is_null()) {
    Questionnaire out;
    const auto& age = require(q, "age", "questionnaire");
    if (!age.is_null()) {
      if (!age.is_number_integer()) fail("questionnaire.age", "expected an integer or null");
      out.age = age.get<int>();
    }
    out.gender = get_string(q, "gender", "questionnaire");
    const auto& diff = require(q, "difficulty", "questionnaire");
    if (!diff.is_null()) {
      if (!diff.is_number_integer()) fail("questionnaire.difficulty", "expected an integer or null");
      out.difficulty = diff.get<int>();
    }
    out.strategy = get_string(q, "strategy", "questionnaire");
    s.questionnaire = std::move(out);
  }

  const auto& m = require(j, "mpl", "");
  if (!m.is_null()) {
    MplRecord rec;
    const auto& letters = require(m, "choices", "mpl");
    if (!letters.is_array()) fail("mpl.choices", "expected an array");
    try {
      rec.choices = parse_mpl_choices(letters.get<std::vector<std::string>>());
    } catch (const json::exception&) {
      fail("mpl.choices", "expected strings");
    } catch (const ValidationError& e) {
      fail("mpl.choices", e.what());
    }
    if (get_bool(m, "paid", "mpl")) {
      MplPayout p;
      p.row = static_cast<int>(get_int(m, "row", "mpl"));
      if (p.row < 1 || p.row > kMplRows) fail("mpl.row", "out of range");
      const auto choice = get_string(m, "choice", "mpl");
      p.choice = choice == "A" ? MplChoice::safe_a : MplChoice::lottery_b;
      if (p.choice != rec.choices[static_cast<std::size_t>(p.row - 1)]) fail("mpl.choice", "disagrees with choices");
      const auto& won = require(m, "lottery_won", "mpl");
      if (!won.is_null()) p.lottery_won = won.get<bool>();
      p.amount = Cents{get_int(m, "amount_cents", "mpl")};
      const auto expected = play_out_mpl(rec.choices, p.row, p.lottery_won.value_or(false));
      if (expected.amount != p.amount) fail("mpl.amount_cents", "inconsistent with the paid row");
      rec.payout = p;
    }
    s.mpl = std::move(rec);
  }
  s.payoff = Cents{get_int(j, "payoff_cents", "")};
  s.created_ms = get_int(j, "created_ms", "");
  s.finished_ms = get_int(j, "finished_ms", "");

  std::optional<Cents> mpl_amount;
  if (s.mpl && s.mpl->payout) mpl_amount = s.mpl->payout->amount;
  if (payoff_euro(s.mission.total_value, mpl_amount, s.participant_index, cfg) != s.payoff)
    fail("payoff_cents", "does not match the payoff rule");
  return s;
}

void validate_session_json(const json& j) { (void)session_from_json(j); }

void write_sessions_jsonl(std::ostream& os, const std::vector<SessionLog>& sessions) {
  for (const auto& s : sessions) os << to_json(s).dump() << '\n';
}

std::vector<SessionLog> read_sessions_jsonl(std::istream& is) {
  std::vector<SessionLog> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(session_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace uavstop
