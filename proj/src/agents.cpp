#include "uavstop/agents.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "uavstop/errors.hpp"
#include "uavstop/mpl.hpp"

namespace uavstop {
namespace {

int leading_streak(std::span<const FlightOutcome> history) {
  int n = 0;
  for (const auto& f : history) {
    if (!f.increased) break;
    ++n;
  }
  return n;
}

// Flights taken while the picture value was already at or above `threshold`.
int flights_at_or_above(std::span<const FlightOutcome> history, Taler threshold) {
  int n = 0;
  Taler before = 0;
  for (const auto& f : history) {
    if (before >= threshold) ++n;
    before = f.sigma_after;
  }
  return n;
}

bool can_fly(const DecisionContext& ctx, const MissionConfig& cfg) {
  return ctx.intact && ctx.rounds_flown_here < cfg.max_rounds;
}

Taler observed_sigma(const DecisionContext& ctx) {
  if (!ctx.feedback_available || !ctx.sigma) throw ProtocolError("closed-loop agent without feedback");
  return *ctx.sigma;
}

class OverconfidentAgent final : public Policy {
 public:
  OverconfidentAgent(BiasProfile p, MissionConfig cfg)
      : p_(std::move(p)), cfg_(std::move(cfg)), threshold_(myopic_threshold(cfg_)), k_(p_.extra_rounds) {}
  std::string name() const override { return p_.label(); }
  bool needs_feedback() const override { return true; }
  bool deterministic() const override { return !p_.extra_rounds_max; }
  void begin_junction(int, Rng& rng) override {
    k_ = p_.extra_rounds_max ? static_cast<int>(rng.uniform_int(p_.extra_rounds, *p_.extra_rounds_max)) : p_.extra_rounds;
  }
  bool decide(const DecisionContext& ctx, Rng&) override {
    const Taler s = observed_sigma(ctx);
    if (!can_fly(ctx, cfg_)) return false;
    return s < threshold_ || flights_at_or_above(ctx.history, threshold_) < k_;
  }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<OverconfidentAgent>(*this); }

 private:
  BiasProfile p_;
  MissionConfig cfg_;
  Taler threshold_;
  int k_;
};

class UnderconfidentAgent final : public Policy {
 public:
  UnderconfidentAgent(BiasProfile p, MissionConfig cfg) : p_(std::move(p)), cfg_(std::move(cfg)) {}
  std::string name() const override { return p_.label(); }
  bool needs_feedback() const override { return true; }
  bool decide(const DecisionContext& ctx, Rng&) override {
    const Taler s = observed_sigma(ctx);
    if (!can_fly(ctx, cfg_)) return false;
    if (p_.max_flights && ctx.rounds_flown_here >= *p_.max_flights) return false;
    return s < p_.stop_threshold;
  }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<UnderconfidentAgent>(*this); }

 private:
  BiasProfile p_;
  MissionConfig cfg_;
};

class StreakAgent final : public Policy {
 public:
  StreakAgent(BiasProfile p, MissionConfig cfg)
      : p_(std::move(p)), cfg_(std::move(cfg)), threshold_(myopic_threshold(cfg_)) {}
  std::string name() const override { return p_.label(); }
  bool needs_feedback() const override { return true; }
  bool deterministic() const override { return p_.hot_hand_continue_prob == 0.0 || p_.hot_hand_continue_prob == 1.0; }
  bool decide(const DecisionContext& ctx, Rng& rng) override {
    const Taler s = observed_sigma(ctx);
    const bool heuristic = closed_loop_decide(ctx, cfg_);
    if (!can_fly(ctx, cfg_) || leading_streak(ctx.history) < p_.streak_len) return heuristic;
    if (p_.streak_response == StreakResponse::keep_flying) return s >= threshold_ ? draw(rng) : heuristic;
    return s < threshold_ ? !draw(rng) : heuristic;
  }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<StreakAgent>(*this); }

 private:
  bool draw(Rng& rng) const {
    const double q = p_.hot_hand_continue_prob;
    if (q == 0.0 || q == 1.0) return q == 1.0;
    return rng.bernoulli(q);
  }

  BiasProfile p_;
  MissionConfig cfg_;
  Taler threshold_;
};

}  // namespace

const char* to_string(BiasKind k) {
  switch (k) {
    case BiasKind::optimizer: return "optimizer";
    case BiasKind::overconfident: return "overconfident";
    case BiasKind::underconfident: return "underconfident";
    case BiasKind::hot_hand: return "hot_hand";
    case BiasKind::open_loop_fixed: return "open_loop_fixed";
  }
  return "?";
}

BiasKind parse_bias_kind(const std::string& s) {
  for (auto k : {BiasKind::optimizer, BiasKind::overconfident, BiasKind::underconfident, BiasKind::hot_hand,
                 BiasKind::open_loop_fixed})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown agent kind '" + s + "'");
}

void BiasProfile::validate(const MissionConfig& cfg) const {
  if (extra_rounds < 1) throw ConfigError("extra_rounds must be >= 1");
  if (extra_rounds_max && *extra_rounds_max < extra_rounds) throw ConfigError("extra_rounds_max < extra_rounds");
  if (!cfg.rho.contains(stop_threshold) || stop_threshold >= myopic_threshold(cfg))
    throw ConfigError("stop_threshold must be a ladder value below " + std::to_string(myopic_threshold(cfg)));
  if (max_flights && (*max_flights < 0 || *max_flights > cfg.max_rounds))
    throw ConfigError("max_flights must lie in 0..max_rounds");
  if (short_rounds < 1) throw ConfigError("short_rounds must be >= 1");
  if (!(hot_hand_continue_prob >= 0.0 && hot_hand_continue_prob <= 1.0)) throw ConfigError("q must lie in [0, 1]");
  if (streak_len < 1) throw ConfigError("streak_len must be >= 1");
  if (planned_rounds < 0 || planned_rounds > cfg.max_rounds) throw ConfigError("planned_rounds must lie in 0..max_rounds");
  if (mpl_switch_row < 1 || mpl_switch_row > kMplRows + 1) throw ConfigError("mpl_switch_row must lie in 1..21");
}

std::string BiasProfile::label() const {
  char buf[96];
  switch (kind) {
    case BiasKind::overconfident:
      if (extra_rounds_max)
        std::snprintf(buf, sizeof buf, "overconfident(k=%d..%d)", extra_rounds, *extra_rounds_max);
      else
        std::snprintf(buf, sizeof buf, "overconfident(k=%d)", extra_rounds);
      return buf;
    case BiasKind::underconfident:
      std::snprintf(buf, sizeof buf, "underconfident(stop=%lld)", static_cast<long long>(stop_threshold));
      return buf;
    case BiasKind::hot_hand:
      std::snprintf(buf, sizeof buf, "%s(q=%g,L=%d)",
                    streak_response == StreakResponse::keep_flying ? "hot_hand" : "gambler", hot_hand_continue_prob,
                    streak_len);
      return buf;
    case BiasKind::open_loop_fixed:
      std::snprintf(buf, sizeof buf, "open_loop_fixed(%d)", planned_rounds);
      return buf;
    case BiasKind::optimizer:
      break;
  }
  return "optimizer";
}

OpenLoopPlan make_plan(const BiasProfile& profile, const MissionConfig& cfg, Rng& rng) {
  profile.validate(cfg);
  const int h = open_loop_heuristic_rounds(cfg);
  std::vector<int> rounds(static_cast<std::size_t>(cfg.num_junctions), h);
  switch (profile.kind) {
    case BiasKind::optimizer: break;
    case BiasKind::overconfident:
      for (auto& r : rounds) {
        const int k = profile.extra_rounds_max
                          ? static_cast<int>(rng.uniform_int(profile.extra_rounds, *profile.extra_rounds_max))
                          : profile.extra_rounds;
        r = std::min(cfg.max_rounds, h + k);
      }
      break;
    case BiasKind::underconfident:
      for (auto& r : rounds) r = std::max(0, h - profile.short_rounds);
      break;
    case BiasKind::open_loop_fixed:
      for (auto& r : rounds) r = profile.planned_rounds;
      break;
    case BiasKind::hot_hand:
      throw ConfigError("hot_hand agents need feedback and cannot play the open-loop treatment");
  }
  return {std::move(rounds)};
}

std::unique_ptr<Policy> make_policy(const BiasProfile& profile, Treatment treatment, const MissionConfig& cfg) {
  profile.validate(cfg);
  if (profile.kind == BiasKind::open_loop_fixed)
    return std::make_unique<PlanPolicy>(
        OpenLoopPlan{std::vector<int>(static_cast<std::size_t>(cfg.num_junctions), profile.planned_rounds)},
        profile.label());
  if (treatment == Treatment::open) {
    if (profile.kind == BiasKind::hot_hand)
      throw ConfigError("hot_hand agents need feedback and cannot play the open-loop treatment");
    if (profile.kind == BiasKind::overconfident && profile.extra_rounds_max)
      throw ConfigError("randomized open-loop plans are drawn per session; use make_plan");
    Rng unused(0);
    return std::make_unique<PlanPolicy>(make_plan(profile, cfg, unused), profile.label());
  }
  switch (profile.kind) {
    case BiasKind::optimizer: return std::make_unique<ClosedLoopHeuristic>(cfg);
    case BiasKind::overconfident: return std::make_unique<OverconfidentAgent>(profile, cfg);
    case BiasKind::underconfident: return std::make_unique<UnderconfidentAgent>(profile, cfg);
    case BiasKind::hot_hand: return std::make_unique<StreakAgent>(profile, cfg);
    case BiasKind::open_loop_fixed: break;
  }
  throw ConfigError("unhandled agent kind");
}

namespace {

std::string participant_code(Rng& rng) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string code(8, 'A');
  for (auto& c : code) c = kAlphabet[rng.uniform_int(0, 35)];
  return code;
}

}  // namespace

std::vector<SessionLog> generate_sessions(const PopulationSpec& spec, const MissionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<SessionLog> out;
  std::uint64_t agent = 0;
  for (const auto& group : spec.groups) {
    if (group.count < 0) throw ConfigError("agent counts must be >= 0");
    group.profile.validate(cfg);
    if (group.treatment == Treatment::open && group.profile.kind == BiasKind::hot_hand)
      throw ConfigError("hot_hand agents need feedback and cannot play the open-loop treatment");
    for (int n = 0; n < group.count; ++n, ++agent) {
      const std::uint64_t session_seed = derive_seed(seed, agent);
      Rng dynamics(derive_seed(session_seed, 0, 1));
      Rng policy_rng(derive_seed(session_seed, 0, 2));
      Rng misc(derive_seed(session_seed, 0, 3));

      SessionLog s;
      char id[32];
      std::snprintf(id, sizeof id, "syn-%06llu", static_cast<unsigned long long>(agent + 1));
      s.session_id = id;
      s.participant_code = participant_code(misc);
      s.participant_index = static_cast<std::int64_t>(agent + 1);
      s.treatment = group.treatment;
      s.source = "synthetic";
      s.agent = group.profile.label();
      s.seed = session_seed;
      s.quiz_attempts = 1;

      std::unique_ptr<Policy> policy;
      if (group.treatment == Treatment::open) {
        s.plan = group.profile.kind == BiasKind::open_loop_fixed
                     ? OpenLoopPlan{std::vector<int>(static_cast<std::size_t>(cfg.num_junctions),
                                                     group.profile.planned_rounds)}
                     : make_plan(group.profile, cfg, policy_rng);
        policy = std::make_unique<PlanPolicy>(*s.plan, s.agent);
      } else {
        policy = make_policy(group.profile, group.treatment, cfg);
      }
      s.mission = run_mission(*policy, cfg, dynamics, policy_rng);

      s.questionnaire = Questionnaire{std::nullopt, "", std::nullopt, "synthetic:" + s.agent};
      MplRecord mpl;
      mpl.choices = monotone_mpl_sheet(group.profile.mpl_switch_row);
      std::optional<Cents> mpl_amount;
      if (mpl_payout_due(s.participant_index, cfg)) {
        mpl.payout = play_out_mpl(mpl.choices, misc);
        mpl_amount = mpl.payout->amount;
      }
      s.mpl = std::move(mpl);
      s.payoff = payoff_euro(s.mission.total_value, mpl_amount, s.participant_index, cfg);
      out.push_back(std::move(s));
    }
  }
  return out;
}

PopulationSpec parse_population(std::istream& is, const MissionConfig& cfg) {
  PopulationSpec spec;
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& what) -> ConfigError {
    return ConfigError("population line " + std::to_string(line_no) + ": " + what);
  };
  auto to_int = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::logic_error&) {
      throw fail("expected an integer, got '" + v + "'");
    }
  };
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = raw.substr(0, hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw fail("expected key = value");
    std::istringstream key_stream(line.substr(0, eq));
    std::string key;
    key_stream >> key;
    std::istringstream rest(line.substr(eq + 1));
    if (key == "seed") {
      std::string v;
      rest >> v;
      spec.seed = static_cast<std::uint64_t>(to_int(v));
    } else if (key == "agent") {
      std::string kind, treatment, count;
      if (!(rest >> kind >> treatment >> count)) throw fail("expected: agent = <kind> <treatment> <count> [options]");
      PopulationGroup g;
      try {
        g.profile.kind = parse_bias_kind(kind);
        g.treatment = parse_treatment(treatment);
      } catch (const std::invalid_argument& e) {
        throw fail(e.what());
      }
      g.count = static_cast<int>(to_int(count));
      if (g.count < 0) throw fail("count must be >= 0");
      std::string opt;
      while (rest >> opt) {
        const auto oeq = opt.find('=');
        if (oeq == std::string::npos) throw fail("option '" + opt + "' is not key=value");
        const std::string k = opt.substr(0, oeq), v = opt.substr(oeq + 1);
        auto& p = g.profile;
        if (k == "extra_rounds") p.extra_rounds = static_cast<int>(to_int(v));
        else if (k == "extra_rounds_max") p.extra_rounds_max = static_cast<int>(to_int(v));
        else if (k == "stop_threshold") p.stop_threshold = to_int(v);
        else if (k == "max_flights") p.max_flights = static_cast<int>(to_int(v));
        else if (k == "short_rounds") p.short_rounds = static_cast<int>(to_int(v));
        else if (k == "streak_len") p.streak_len = static_cast<int>(to_int(v));
        else if (k == "planned_rounds") p.planned_rounds = static_cast<int>(to_int(v));
        else if (k == "mpl_switch_row") p.mpl_switch_row = static_cast<int>(to_int(v));
        else if (k == "q") {
          try {
            p.hot_hand_continue_prob = std::stod(v);
          } catch (const std::logic_error&) {
            throw fail("q must be a number");
          }
        } else if (k == "response") {
          if (v == "keep") p.streak_response = StreakResponse::keep_flying;
          else if (v == "stop") p.streak_response = StreakResponse::stop_flying;
          else throw fail("response must be keep or stop");
        } else {
          throw fail("unknown option '" + k + "'");
        }
      }
      try {
        g.profile.validate(cfg);
      } catch (const ConfigError& e) {
        throw fail(e.what());
      }
      if (g.treatment == Treatment::open && g.profile.kind == BiasKind::hot_hand)
        throw fail("hot_hand agents cannot play the open-loop treatment");
      spec.groups.push_back(std::move(g));
    } else {
      throw fail("unknown key '" + key + "'");
    }
  }
  return spec;
}

}  // namespace uavstop
