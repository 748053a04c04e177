#include "uavstop/service.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "uavstop/errors.hpp"

namespace uavstop {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Phase p) {
  switch (p) {
    case Phase::created: return "created";
    case Phase::instructions: return "instructions";
    case Phase::quiz: return "quiz";
    case Phase::flying: return "flying";
    case Phase::questionnaire: return "questionnaire";
    case Phase::mpl: return "mpl";
    case Phase::done: return "done";
  }
  return "?";
}

ordered_json to_json(const EventRecord& e) {
  ordered_json j;
  j["schema"] = kEventSchema;
  j["session_id"] = e.session_id;
  j["seq"] = e.seq;
  j["kind"] = e.kind;
  j["payload"] = e.payload;
  j["ts_ms"] = e.ts_ms;
  return j;
}

EventRecord event_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kEventSchema) throw ValidationError("event: unsupported schema");
    EventRecord e;
    e.session_id = j.at("session_id").get<std::string>();
    e.seq = j.at("seq").get<std::int64_t>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.at("payload");
    e.ts_ms = j.at("ts_ms").get<std::int64_t>();
    return e;
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("event: ") + ex.what());
  }
}

std::vector<EventRecord> read_events_jsonl(std::istream& is) {
  std::vector<EventRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(event_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ValidationError("line " + std::to_string(n) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

namespace {

[[noreturn]] void bad_log(const std::string& what) { throw ValidationError("event log: " + what); }

FlightOutcome outcome_from(const json& p) {
  try {
    return {p.at("junction").get<int>(), p.at("round").get<int>(), p.at("increased").get<bool>(),
            p.at("crashed").get<bool>(), p.at("sigma_after").get<Taler>()};
  } catch (const json::exception&) {
    bad_log("malformed flight_outcome");
  }
}

void apply(Mission& m, const FlightOutcome& recorded) {
  const auto& st = m.state();
  if (recorded.junction != st.junction || recorded.round != st.rounds_flown_here + 1)
    bad_log("flight out of sequence at junction " + std::to_string(recorded.junction));
  const auto got = m.fly(FlightDraw{recorded.increased, recorded.crashed});
  if (!(got == recorded)) bad_log("flight outcome disagrees with the dynamics");
}

}  // namespace

MissionLog replay_events(std::span<const EventRecord> events, const MissionConfig& cfg) {
  if (events.empty() || events.front().kind != "created") bad_log("must start with a created event");
  const auto& id = events.front().session_id;
  for (std::size_t k = 0; k < events.size(); ++k) {
    if (events[k].session_id != id) bad_log("mixed sessions");
    if (k > 0 && events[k].seq <= events[k - 1].seq) bad_log("sequence numbers must increase");
  }
  Treatment treatment;
  try {
    treatment = parse_treatment(events.front().payload.at("treatment").get<std::string>());
  } catch (const std::exception&) {
    bad_log("created event without a treatment");
  }

  Mission m(cfg);
  std::optional<Taler> recorded_total;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    if (e.kind == "payoff") {
      recorded_total = e.payload.value("total_value", Taler{-1});
    } else if (treatment == Treatment::closed && e.kind == "decision") {
      const auto action = e.payload.value("action", std::string());
      if (action == "fly") {
        if (k + 1 >= events.size() || events[k + 1].kind != "flight_outcome") bad_log("fly decision without outcome");
        apply(m, outcome_from(events[++k].payload));
      } else if (action == "stop") {
        if (m.finished()) bad_log("stop after the mission ended");
        m.stop();
      } else {
        bad_log("unknown decision");
      }
    } else if (e.kind == "flight_outcome") {
      if (treatment == Treatment::closed) bad_log("outcome without a decision");
    } else if (treatment == Treatment::open && e.kind == "plan_submitted") {
      OpenLoopPlan plan;
      try {
        plan.planned_rounds = e.payload.at("plan").get<std::vector<int>>();
        plan.validate(cfg);
      } catch (const std::exception&) {
        bad_log("malformed plan");
      }
      std::size_t next = k + 1;
      for (int j = 1; j <= cfg.num_junctions && !m.finished(); ++j) {
        int flown = 0;
        while (next < events.size() && events[next].kind == "flight_outcome") {
          const auto o = outcome_from(events[next].payload);
          if (o.junction != j) break;
          apply(m, o);
          ++flown;
          ++next;
          if (m.finished()) break;
        }
        if (m.finished()) break;
        const int planned = plan.planned_rounds[static_cast<std::size_t>(j - 1)];
        if (flown > planned || (flown < planned && m.state().sigma != cfg.rho.top()))
          bad_log("flights do not follow the plan at junction " + std::to_string(j));
        m.stop();
      }
      k = next - 1;
    }
  }
  if (recorded_total) {
    if (!m.finished()) bad_log("payoff recorded for an unfinished mission");
    if (mission_value(m.log()) != *recorded_total) bad_log("recorded total value does not replay");
  }
  return m.log();
}

std::vector<QuizItem> control_questions(const MissionConfig& cfg) {
  return {
      {"crash_percent", "With what probability (in percent) can the drone crash after each round?",
       cfg.crash_prob * 100.0},
      {"drone_value", "How many Taler is the drone worth if it is still intact at the end?",
       double(cfg.drone_value)},
      {"max_rounds", "How many rounds can you fly at most over one traffic junction?", double(cfg.max_rounds)},
      {"taler_per_euro", "How many Taler are exchanged for one euro?", double(cfg.taler_per_euro)},
  };
}

namespace {

std::string default_instructions(const MissionConfig& cfg) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "You operate a surveillance drone over %d traffic junctions. At each junction you may fly up to %d "
                "rounds; every round takes a picture. The first picture at a junction always adds information, "
                "later pictures add information with probability %g%%. After every round the drone crashes with "
                "probability %g%%: you keep the information gathered so far, but the drone (worth %lld Taler) is "
                "lost and the mission ends. Your payoff is the total value in Taler, exchanged at %lld Taler per "
                "euro.",
                cfg.num_junctions, cfg.max_rounds, cfg.increase_prob * 100.0, cfg.crash_prob * 100.0,
                static_cast<long long>(cfg.drone_value), static_cast<long long>(cfg.taler_per_euro));
  return buf;
}

ServiceError out_of_phase(Phase have, const char* want) {
  return ServiceError("out_of_phase", 409,
                      std::string("request needs phase ") + want + ", session is in phase " + to_string(have));
}

ServiceError invalid(const std::string& what) { return ServiceError("validation", 400, what); }

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string make_code(Rng& rng) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string code(8, 'A');
  for (auto& c : code) c = kAlphabet[rng.uniform_int(0, 35)];
  return code;
}

json mpl_sheet_view() {
  json rows = json::array();
  for (int r = 1; r <= kMplRows; ++r)
    rows.push_back({{"row", r},
                    {"safe_eur", format_euro(mpl_safe_amount(r))},
                    {"lottery", "30.00 EUR with probability 50%, otherwise 0.00 EUR"}});
  return rows;
}

}  // namespace

struct ExperimentService::Session {
  Session(const MissionConfig& cfg, std::uint64_t s) : seed(s), dyn(derive_seed(s, 0, 1)), mpl_rng(derive_seed(s, 0, 3)), mission(cfg) {}

  std::mutex mu;
  std::string id, code;
  Treatment treatment = Treatment::closed;
  Phase phase = Phase::created;
  std::uint64_t seed;
  Rng dyn, mpl_rng;
  Mission mission;
  int quiz_attempts = 0;
  std::optional<OpenLoopPlan> plan;
  std::optional<Questionnaire> questionnaire;
  std::optional<std::vector<MplChoice>> choices;
  std::optional<SessionLog> final_log;
  std::vector<EventRecord> events;
  std::int64_t created_ms = 0;
};

ExperimentService::ExperimentService(ServiceOptions opts)
    : opts_(std::move(opts)), assign_rng_(derive_seed(opts_.seed, 0, 5)) {
  opts_.mission.validate();
  if (!opts_.clock)
    opts_.clock = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  if (opts_.instructions.empty()) opts_.instructions = default_instructions(opts_.mission);
  if (!opts_.data_dir.empty()) {
    std::filesystem::create_directories(opts_.data_dir);
    events_out_.open(opts_.data_dir / "events.jsonl", std::ios::app);
    sessions_out_.open(opts_.data_dir / "sessions.jsonl", std::ios::app);
    if (!events_out_ || !sessions_out_) throw std::runtime_error("cannot open logs in " + opts_.data_dir.string());
  }
}

ExperimentService::~ExperimentService() = default;

std::shared_ptr<ExperimentService::Session> ExperimentService::find(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError("not_found", 404, "no session '" + id + "'");
  return it->second;
}

void ExperimentService::log_event(Session& s, const std::string& kind, json payload) {
  EventRecord e{s.id, static_cast<std::int64_t>(s.events.size()) + 1, kind, std::move(payload), opts_.clock()};
  if (events_out_.is_open()) {
    const auto line = to_json(e).dump();
    std::lock_guard lock(file_mu_);
    events_out_ << line << '\n';
    events_out_.flush();
    if (!events_out_) throw ServiceError("storage", 500, "event log write failed");
  }
  s.events.push_back(std::move(e));
}

Treatment ExperimentService::next_random_treatment() {
  if (block_.empty()) {
    block_ = {Treatment::closed, Treatment::open};
    if (assign_rng_.bernoulli(0.5)) std::swap(block_[0], block_[1]);
  }
  const Treatment t = block_.front();
  block_.erase(block_.begin());
  return t;
}

json ExperimentService::create_session(std::optional<Treatment> forced) {
  std::uint64_t k;
  Treatment t;
  {
    std::lock_guard lock(assign_mu_);
    k = created_++;
    t = forced ? *forced : next_random_treatment();
  }
  const std::uint64_t seed = derive_seed(opts_.seed, k);
  auto s = std::make_shared<Session>(opts_.mission, seed);
  Rng code_rng(derive_seed(seed, 0, 4));
  s->id = "s" + hex16(derive_seed(seed, 0, 6));
  s->code = make_code(code_rng);
  s->treatment = t;
  s->created_ms = opts_.clock();
  std::lock_guard session_lock(s->mu);
  log_event(*s, "created",
            {{"treatment", to_string(t)},
             {"assignment", forced ? "forced" : "random"},
             {"participant_code", s->code},
             {"rng", {{"algorithm", Rng::kAlgorithm}, {"seed", seed}}},
             {"config", config_to_json(opts_.mission)}});
  s->phase = Phase::instructions;
  {
    std::unique_lock lock(sessions_mu_);
    sessions_[s->id] = s;
    order_.push_back(s->id);
  }
  return state_locked(*s);
}

json ExperimentService::state_locked(const Session& s) const {
  const auto& cfg = opts_.mission;
  json j;
  j["session_id"] = s.id;
  j["participant_code"] = s.code;
  j["treatment"] = to_string(s.treatment);
  j["phase"] = to_string(s.phase);
  j["parameters"] = {{"num_junctions", cfg.num_junctions},
                     {"max_rounds", cfg.max_rounds},
                     {"drone_value", cfg.drone_value},
                     {"taler_per_euro", cfg.taler_per_euro}};
  if (s.phase == Phase::instructions) j["instructions"] = opts_.instructions;
  if (s.phase == Phase::quiz) {
    json q = json::array();
    for (const auto& item : control_questions(cfg)) q.push_back({{"id", item.id}, {"question", item.question}});
    j["quiz"] = std::move(q);
    j["quiz_attempts"] = s.quiz_attempts;
  }
  if (s.phase == Phase::mpl) j["mpl_sheet"] = mpl_sheet_view();
  if (s.treatment == Treatment::closed && s.phase >= Phase::flying) {
    const auto& st = s.mission.state();
    j["mission"] = {{"junction", st.junction},
                    {"round", st.rounds_flown_here},
                    {"sigma", st.sigma},
                    {"banked_info", st.banked_info},
                    {"intact", st.intact},
                    {"can_fly", s.phase == Phase::flying && st.intact && st.rounds_flown_here < cfg.max_rounds &&
                                    st.sigma < cfg.rho.top()}};
  }
  if (s.treatment == Treatment::open && s.phase >= Phase::flying) j["plan_submitted"] = s.plan.has_value();
  if (s.phase == Phase::done) j["result"] = result_locked(s);
  return j;
}

json ExperimentService::state(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return state_locked(*s);
}

json ExperimentService::ack_instructions(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->phase != Phase::instructions) throw out_of_phase(s->phase, "instructions");
  log_event(*s, "instructions_ack", json::object());
  s->phase = Phase::quiz;
  return state_locked(*s);
}

json ExperimentService::submit_quiz(const std::string& id, const json& answers) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->phase != Phase::quiz) throw out_of_phase(s->phase, "quiz");
  if (!answers.is_object()) throw invalid("quiz answers must be an object keyed by question id");
  const auto items = control_questions(opts_.mission);
  for (const auto& [key, _] : answers.items()) {
    if (std::none_of(items.begin(), items.end(), [&](const QuizItem& q) { return q.id == key; }))
      throw invalid("unknown quiz question '" + key + "'");
  }
  json wrong = json::array(), wrong_idx = json::array();
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto it = answers.find(items[k].id);
    const bool ok = it != answers.end() && it->is_number() && std::abs(it->get<double>() - items[k].answer) < 1e-9;
    if (!ok) {
      wrong.push_back(items[k].id);
      wrong_idx.push_back(k);
    }
  }
  ++s->quiz_attempts;
  const bool passed = wrong.empty();
  log_event(*s, "quiz_answer", {{"answers", answers}, {"wrong", wrong}, {"passed", passed}});
  if (passed) s->phase = Phase::flying;
  return {{"passed", passed}, {"wrong", wrong}, {"wrong_indices", wrong_idx}, {"phase", to_string(s->phase)}};
}

void ExperimentService::finish_flying(Session& s) { s.phase = Phase::questionnaire; }

json ExperimentService::decide_round(const std::string& id, bool fly) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto& cfg = opts_.mission;
  if (s->treatment != Treatment::closed)
    throw ServiceError("wrong_treatment", 409, "round decisions exist only in the closed-loop treatment");
  if (s->phase != Phase::flying) {
    if (s->phase > Phase::flying && !s->mission.state().intact)
      throw ServiceError("crashed", 409, "the drone has crashed; the mission is over");
    throw out_of_phase(s->phase, "flying");
  }
  const auto before = s->mission.state();
  if (fly && before.rounds_flown_here >= cfg.max_rounds) throw invalid("round limit reached at this junction");
  if (fly && before.sigma >= cfg.rho.top()) throw invalid("the picture value is already at its maximum");

  log_event(*s, "decision",
            {{"junction", before.junction}, {"round", before.rounds_flown_here}, {"action", fly ? "fly" : "stop"}});
  json out;
  if (fly) {
    const auto o = s->mission.fly(s->dyn);
    log_event(*s, "flight_outcome",
              {{"junction", o.junction},
               {"round", o.round},
               {"increased", o.increased},
               {"crashed", o.crashed},
               {"sigma_after", o.sigma_after}});
    out = {{"action", "fly"},
           {"junction", o.junction},
           {"round", o.round},
           {"increased", o.increased},
           {"sigma", o.sigma_after},
           {"intact", !o.crashed}};
  } else {
    s->mission.stop();
    out = {{"action", "stop"}, {"junction", before.junction}, {"banked", before.sigma}};
  }
  if (s->mission.finished()) finish_flying(*s);
  const auto& st = s->mission.state();
  out["banked_info"] = st.banked_info;
  out["mission_over"] = s->mission.finished();
  out["next_junction"] = s->mission.finished() ? json(nullptr) : json(st.junction);
  out["can_fly"] = !s->mission.finished() && st.rounds_flown_here < cfg.max_rounds && st.sigma < cfg.rho.top();
  out["phase"] = to_string(s->phase);
  return out;
}

json ExperimentService::submit_plan(const std::string& id, const json& plan_json) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto& cfg = opts_.mission;
  if (s->treatment != Treatment::open)
    throw ServiceError("wrong_treatment", 409, "advance plans exist only in the open-loop treatment");
  if (s->phase != Phase::flying) throw out_of_phase(s->phase, "flying");
  if (!plan_json.is_array()) throw invalid("plan must be an array of integers");
  OpenLoopPlan plan;
  for (const auto& x : plan_json) {
    if (!x.is_number_integer()) throw invalid("plan entries must be integers");
    plan.planned_rounds.push_back(x.get<int>());
  }
  try {
    plan.validate(cfg);
  } catch (const ValidationError& e) {
    throw invalid(e.what());
  }

  log_event(*s, "plan_submitted", {{"plan", plan.planned_rounds}});
  for (int j = 1; j <= cfg.num_junctions && !s->mission.finished(); ++j) {
    for (int k = 0; k < plan.planned_rounds[static_cast<std::size_t>(j - 1)]; ++k) {
      if (s->mission.state().sigma >= cfg.rho.top()) break;
      const auto o = s->mission.fly(s->dyn);
      log_event(*s, "flight_outcome",
                {{"junction", o.junction},
                 {"round", o.round},
                 {"increased", o.increased},
                 {"crashed", o.crashed},
                 {"sigma_after", o.sigma_after}});
      if (o.crashed) break;
    }
    if (!s->mission.finished()) s->mission.stop();
  }
  s->plan = std::move(plan);
  finish_flying(*s);
  return {{"accepted", true}, {"phase", to_string(s->phase)}};
}

json ExperimentService::submit_questionnaire(const std::string& id, const json& fields) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->phase != Phase::questionnaire) throw out_of_phase(s->phase, "questionnaire");
  if (!fields.is_object()) throw invalid("questionnaire must be an object");
  for (const auto& [key, _] : fields.items())
    if (key != "age" && key != "gender" && key != "difficulty" && key != "strategy")
      throw invalid("unknown questionnaire field '" + key + "'");
  Questionnaire q;
  auto opt_int = [&](const char* key, int lo, int hi) -> std::optional<int> {
    const auto it = fields.find(key);
    if (it == fields.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer() || it->get<long long>() < lo || it->get<long long>() > hi)
      throw invalid(std::string(key) + " must be an integer in " + std::to_string(lo) + ".." + std::to_string(hi));
    return it->get<int>();
  };
  auto text = [&](const char* key, std::size_t max_len) {
    const auto it = fields.find(key);
    if (it == fields.end() || it->is_null()) return std::string();
    if (!it->is_string() || it->get<std::string>().size() > max_len)
      throw invalid(std::string(key) + " must be a string of at most " + std::to_string(max_len) + " bytes");
    return it->get<std::string>();
  };
  q.age = opt_int("age", 0, 130);
  q.difficulty = opt_int("difficulty", 1, 7);
  q.gender = text("gender", 64);
  q.strategy = text("strategy", 4000);
  log_event(*s, "questionnaire", fields);
  s->questionnaire = std::move(q);
  s->phase = Phase::mpl;
  return state_locked(*s);
}

json ExperimentService::submit_mpl(const std::string& id, const json& letters) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto& cfg = opts_.mission;
  if (s->phase != Phase::mpl) throw out_of_phase(s->phase, "mpl");
  std::vector<MplChoice> choices;
  try {
    if (!letters.is_array()) throw ValidationError("price-list choices must be an array");
    std::vector<std::string> raw;
    for (const auto& x : letters) {
      if (!x.is_string()) throw ValidationError("price-list choices must be \"A\" or \"B\"");
      raw.push_back(x.get<std::string>());
    }
    choices = parse_mpl_choices(raw);
  } catch (const ValidationError& e) {
    throw invalid(e.what());
  }
  log_event(*s, "mpl_choice", {{"choices", letters}});

  SessionLog log;
  log.session_id = s->id;
  log.participant_code = s->code;
  log.treatment = s->treatment;
  log.source = "human";
  log.seed = s->seed;
  log.quiz_attempts = s->quiz_attempts;
  log.plan = s->plan;
  log.mission = s->mission.log();
  log.questionnaire = s->questionnaire;
  log.mpl = MplRecord{choices, std::nullopt};
  log.created_ms = s->created_ms;
  {
    std::lock_guard lock_index(finalize_mu_);
    log.participant_index = next_index_++;
    std::optional<Cents> mpl_amount;
    if (mpl_payout_due(log.participant_index, cfg)) {
      log.mpl->payout = play_out_mpl(choices, s->mpl_rng);
      mpl_amount = log.mpl->payout->amount;
    }
    log.payoff = payoff_euro(log.mission.total_value, mpl_amount, log.participant_index, cfg);
    log.finished_ms = opts_.clock();
    const auto snapshot = to_json(log);
    session_from_json(json::parse(snapshot.dump()));  // the snapshot must pass its own schema

    json mpl_view = nullptr;
    if (log.mpl->payout) {
      const auto& p = *log.mpl->payout;
      mpl_view = {{"row", p.row},
                  {"choice", p.choice == MplChoice::safe_a ? "A" : "B"},
                  {"lottery_won", p.lottery_won ? json(*p.lottery_won) : json(nullptr)},
                  {"amount_cents", p.amount.value}};
    }
    log_event(*s, "payoff",
              {{"participant_index", log.participant_index},
               {"total_value", log.mission.total_value},
               {"payoff_cents", log.payoff.value},
               {"mpl", mpl_view}});
    if (sessions_out_.is_open()) {
      std::lock_guard file_lock(file_mu_);
      sessions_out_ << snapshot.dump() << '\n';
      sessions_out_.flush();
      if (!sessions_out_) throw ServiceError("storage", 500, "session snapshot write failed");
    }
    completed_.push_back(log);
  }
  s->choices = std::move(choices);
  s->final_log = std::move(log);
  s->phase = Phase::done;
  return result_locked(*s);
}

json ExperimentService::result_locked(const Session& s) const {
  const auto& log = *s.final_log;
  json junctions = json::array();
  for (const auto& rec : log.mission.junctions) {
    json flights = json::array();
    for (const auto& f : rec.flights)
      flights.push_back({{"round", f.round}, {"increased", f.increased}, {"crashed", f.crashed},
                         {"sigma_after", f.sigma_after}});
    junctions.push_back({{"junction", rec.junction},
                         {"info", rec.info},
                         {"end", rec.end == JunctionEnd::stopped ? "stopped" : "crashed"},
                         {"flights", std::move(flights)}});
  }
  json mpl = {{"paid", false}};
  if (log.mpl && log.mpl->payout) {
    const auto& p = *log.mpl->payout;
    mpl = {{"paid", true},
           {"row", p.row},
           {"choice", p.choice == MplChoice::safe_a ? "A" : "B"},
           {"lottery_won", p.lottery_won ? json(*p.lottery_won) : json(nullptr)},
           {"amount_eur", format_euro(p.amount)}};
  }
  return {{"session_id", log.session_id},
          {"participant_index", log.participant_index},
          {"treatment", to_string(log.treatment)},
          {"total_value", log.mission.total_value},
          {"intact", log.mission.intact},
          {"junctions", std::move(junctions)},
          {"mpl", std::move(mpl)},
          {"payoff_cents", log.payoff.value},
          {"payoff_eur", format_euro(log.payoff)}};
}

json ExperimentService::result(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->phase != Phase::done) throw out_of_phase(s->phase, "done");
  return result_locked(*s);
}

std::vector<EventRecord> ExperimentService::events(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->events;
}

std::vector<SessionLog> ExperimentService::completed_sessions() const {
  std::lock_guard lock(finalize_mu_);
  return completed_;
}

std::vector<std::string> ExperimentService::session_ids() const {
  std::shared_lock lock(sessions_mu_);
  return order_;
}

}  // namespace uavstop
