#include "uavstop/analysis.hpp"

#include <algorithm>
#include <cstdio>

#include "uavstop/errors.hpp"

namespace uavstop {
namespace {

int ladder_steps(Taler from, Taler to, const MissionConfig& cfg) {
  const auto a = cfg.rho.index_of(from), b = cfg.rho.index_of(to);
  if (!a || !b) throw DomainError("value off the ladder");
  return static_cast<int>(*b) - static_cast<int>(*a);
}

}  // namespace

const char* to_string(Label l) {
  switch (l) {
    case Label::overconfident: return "overconfident";
    case Label::underconfident: return "underconfident";
    case Label::optimal: return "optimal";
    case Label::unobservable: return "unobservable";
  }
  return "?";
}

const char* to_string(Category c) {
  switch (c) {
    case Category::optimal: return "optimal";
    case Category::rather_overconfident: return "rather_overconfident";
    case Category::strongly_overconfident: return "strongly_overconfident";
    case Category::rather_underconfident: return "rather_underconfident";
    case Category::strongly_underconfident: return "strongly_underconfident";
    case Category::mixed: return "mixed";
    case Category::excluded: return "excluded";
  }
  return "?";
}

const char* to_string(RiskClass r) {
  switch (r) {
    case RiskClass::risk_averse: return "risk_averse";
    case RiskClass::risk_neutral: return "risk_neutral";
    case RiskClass::risk_seeking: return "risk_seeking";
    case RiskClass::not_identifiable: return "not_identifiable";
  }
  return "?";
}

JunctionLabel label_closed_junction(const JunctionRecord& rec, const MissionConfig& cfg, Observability obs) {
  const Taler threshold = myopic_threshold(cfg);
  const auto& f = rec.flights;
  if (f.size() == 1 && f.front().crashed) return {Label::unobservable, 0};

  int beyond = 0;
  Taler before = 0;
  for (const auto& flight : f) {
    if (before >= threshold) ++beyond;
    before = flight.sigma_after;
  }
  if (beyond > 0) return {Label::overconfident, beyond};

  const bool voluntary = rec.end == JunctionEnd::stopped && static_cast<int>(f.size()) < cfg.max_rounds &&
                         rec.info < cfg.rho.top();
  if (voluntary && rec.info < threshold) return {Label::underconfident, -ladder_steps(rec.info, threshold, cfg)};
  if (obs == Observability::decision_point && !voluntary) return {Label::unobservable, 0};
  return {Label::optimal, 0};
}

JunctionLabel label_planned_junction(int planned_rounds, const MissionConfig& cfg) {
  const int diff = planned_rounds - open_loop_heuristic_rounds(cfg);
  if (diff > 0) return {Label::overconfident, diff};
  if (diff < 0) return {Label::underconfident, diff};
  return {Label::optimal, 0};
}

JunctionLabel label_junction(const JunctionRecord& rec, Treatment treatment, const MissionConfig& cfg,
                             std::optional<int> planned, Observability obs) {
  if (treatment == Treatment::closed) return label_closed_junction(rec, cfg, obs);
  if (!planned) throw DomainError("open-loop junctions are labeled from their plan");
  return label_planned_junction(*planned, cfg);
}

std::vector<JunctionLabel> session_labels(const SessionLog& s, const AnalysisOptions& opts) {
  const auto& cfg = s.mission.config;
  std::vector<JunctionLabel> out;
  if (s.treatment == Treatment::closed) {
    for (const auto& rec : s.mission.junctions) out.push_back(label_closed_junction(rec, cfg, opts.observability));
    return out;
  }
  if (!s.plan) throw DomainError("open-loop session without a plan");
  if (opts.count_all_plans) {
    for (int r : s.plan->planned_rounds) out.push_back(label_planned_junction(r, cfg));
  } else {
    for (const auto& rec : s.mission.junctions)
      out.push_back(label_planned_junction(s.plan->planned_rounds.at(static_cast<std::size_t>(rec.junction - 1)), cfg));
  }
  return out;
}

ConfidenceDegrees degrees_from_counts(int n_oc, int n_uc, int n_opt) {
  if (n_oc < 0 || n_uc < 0 || n_opt < 0) throw DomainError("junction counts must be >= 0");
  ConfidenceDegrees d{0.0, 0.0, 0.0, n_oc, n_uc, n_opt};
  const double n = d.observed();
  if (n == 0) throw DomainError("no observable junction");
  d.oc = n_oc / n;
  d.uc = n_uc / n;
  d.opt = n_opt / n;
  return d;
}

std::optional<ConfidenceDegrees> confidence_degrees(const SessionLog& s, const AnalysisOptions& opts) {
  int oc = 0, uc = 0, opt = 0;
  for (const auto& l : session_labels(s, opts)) {
    if (l.label == Label::overconfident) ++oc;
    if (l.label == Label::underconfident) ++uc;
    if (l.label == Label::optimal) ++opt;
  }
  if (oc + uc + opt == 0) return std::nullopt;
  return degrees_from_counts(oc, uc, opt);
}

Category categorize(const ConfidenceDegrees& d) {
  constexpr double third = 1.0 / 3.0;
  if (d.oc == 0.0 && d.uc == 0.0) return Category::optimal;
  const bool oc_big = d.oc > third, uc_big = d.uc > third;
  if (!oc_big && !uc_big) return Category::mixed;
  bool over = oc_big;
  if (oc_big && uc_big) {
    if (d.oc == d.uc) return Category::mixed;
    over = d.oc > d.uc;
  }
  if (over) return d.oc > 0.5 ? Category::strongly_overconfident : Category::rather_overconfident;
  return d.uc > 0.5 ? Category::strongly_underconfident : Category::rather_underconfident;
}

Category categorize(const std::optional<ConfidenceDegrees>& d) { return d ? categorize(*d) : Category::excluded; }

std::vector<HotHandRecord> hot_hand_scan(const SessionLog& s, int streak_len) {
  if (s.treatment != Treatment::closed) throw UnsupportedError("hot-hand scan needs feedback; open-loop session");
  if (streak_len < 1) throw DomainError("streak length must be >= 1");
  const Taler threshold = myopic_threshold(s.mission.config);
  std::vector<HotHandRecord> out;
  for (const auto& rec : s.mission.junctions) {
    if (rec.flights.empty()) continue;
    HotHandRecord h;
    h.junction = rec.junction;
    for (std::size_t t = 0; t < rec.flights.size(); ++t) {
      const auto& f = rec.flights[t];
      if (!f.increased || f.crashed) break;
      if (f.sigma_after >= threshold) {
        h.situation = static_cast<int>(t + 1) >= streak_len;
        h.fallacy = h.situation && rec.flights.size() > t + 1;
        break;
      }
    }
    out.push_back(h);
  }
  return out;
}

RiskAttitude classify_risk(std::span<const MplChoice> choices) {
  if (choices.size() != static_cast<std::size_t>(kMplRows))
    throw DomainError("price list needs exactly " + std::to_string(kMplRows) + " choices");
  RiskAttitude r;
  for (std::size_t i = 1; i < choices.size(); ++i) r.switches += choices[i] != choices[i - 1];
  if (r.switches >= 3) return r;

  bool a_before_b = false, seen_a = false;
  for (auto c : choices) {
    if (c == MplChoice::safe_a) seen_a = true;
    else if (seen_a) a_before_b = true;
  }
  r.weakly_identified = r.switches == 2 || a_before_b;
  if (choices.back() == MplChoice::lottery_b) {
    r.attitude = RiskClass::risk_seeking;
    return r;
  }
  int row = kMplRows;
  while (row > 1 && choices[static_cast<std::size_t>(row - 2)] == MplChoice::safe_a) --row;
  r.switch_row = row;
  r.attitude = row < kNeutralSwitchRow   ? RiskClass::risk_averse
               : row == kNeutralSwitchRow ? RiskClass::risk_neutral
                                          : RiskClass::risk_seeking;
  return r;
}

SessionAnalysis analyze_session(const SessionLog& s, const AnalysisOptions& opts) {
  SessionAnalysis a;
  a.session_id = s.session_id;
  a.treatment = s.treatment;
  a.agent = s.agent;
  a.labels = session_labels(s, opts);
  a.degrees = confidence_degrees(s, opts);
  a.category = categorize(a.degrees);
  if (s.treatment == Treatment::closed) a.hot_hand = hot_hand_scan(s, opts.streak_len);
  if (s.mpl) a.risk = classify_risk(s.mpl->choices);
  a.junctions_played = static_cast<int>(s.mission.junctions.size());
  std::size_t flights = 0;
  for (const auto& rec : s.mission.junctions) flights += rec.flights.size();
  if (a.junctions_played > 0) a.mean_rounds = double(flights) / a.junctions_played;
  a.degenerate_plan = s.plan && std::all_of(s.plan->planned_rounds.begin(), s.plan->planned_rounds.end(),
                                            [](int r) { return r == 0; });
  return a;
}

MeanSd mean_sd(std::span<const double> xs) { return {mean(xs), sample_sd(xs), xs.size()}; }

namespace {

std::vector<double> overflight_sample(const std::vector<const SessionAnalysis*>& group, MwMode mode) {
  std::vector<double> out;
  for (const auto* a : group) {
    std::vector<double> own;
    for (const auto& l : a->labels)
      if (l.label == Label::overconfident) own.push_back(l.rounds_beyond_optimum);
    if (mode == MwMode::junction)
      out.insert(out.end(), own.begin(), own.end());
    else if (!own.empty())
      out.push_back(mean(own));
  }
  return out;
}

std::optional<TestResult> kw_by_risk(const std::vector<const SessionAnalysis*>& group, bool over) {
  std::vector<std::vector<double>> by_class(3);
  for (const auto* a : group) {
    if (!a->degrees || !a->risk || a->risk->attitude == RiskClass::not_identifiable) continue;
    by_class[static_cast<std::size_t>(a->risk->attitude)].push_back(over ? a->degrees->oc : a->degrees->uc);
  }
  std::erase_if(by_class, [](const auto& g) { return g.empty(); });
  if (by_class.size() < 2) return std::nullopt;
  return kruskal_wallis(by_class);
}

std::vector<double> risk_codes(const std::vector<const SessionAnalysis*>& group) {
  std::vector<double> out;
  for (const auto* a : group)
    if (a->risk && a->risk->attitude != RiskClass::not_identifiable)
      out.push_back(static_cast<double>(a->risk->attitude));
  return out;
}

}  // namespace

SummaryReport summarize(std::span<const SessionLog> sessions, const AnalysisOptions& opts) {
  if (sessions.empty()) throw DomainError("nothing to summarize");
  SummaryReport r;
  r.options = opts;
  for (const auto& s : sessions) r.sessions.push_back(analyze_session(s, opts));

  std::vector<const SessionAnalysis*> groups[2];
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& s = sessions[i];
    const auto& a = r.sessions[i];
    groups[s.treatment == Treatment::closed ? 0 : 1].push_back(&a);
    if (s.treatment != Treatment::closed) continue;
    const auto hh = a.hot_hand.begin();
    std::size_t k = 0;
    for (const auto& rec : s.mission.junctions) {
      if (rec.flights.empty()) continue;
      const auto& h = hh[static_cast<std::ptrdiff_t>(k++)];
      if (h.situation) {
        ++(h.fallacy ? r.hot_hand.hot_oc : r.hot_hand.hot_not_oc);
      } else {
        const bool oc = label_closed_junction(rec, s.mission.config).label == Label::overconfident;
        ++(oc ? r.hot_hand.no_hot_oc : r.hot_hand.no_hot_not_oc);
      }
    }
  }

  for (int g = 0; g < 2; ++g) {
    if (groups[g].empty()) continue;
    TreatmentSummary t;
    t.treatment = g == 0 ? Treatment::closed : Treatment::open;
    t.sessions = groups[g].size();
    std::vector<double> rounds, value, earnings, oc, uc, opt;
    long long crashed = 0;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
      const auto& a = r.sessions[i];
      if (a.treatment != t.treatment) continue;
      const auto& s = sessions[i];
      if (a.junctions_played > 0) rounds.push_back(a.mean_rounds);
      value.push_back(double(s.mission.total_value));
      earnings.push_back(double(payoff_euro(s.mission.total_value, std::nullopt, 0, s.mission.config).value) / 100.0);
      crashed += !s.mission.intact;
      ++t.categories[a.category];
      if (a.degrees) {
        oc.push_back(a.degrees->oc);
        uc.push_back(a.degrees->uc);
        opt.push_back(a.degrees->opt);
        ++t.counted_subjects;
        t.oc_subjects += a.category == Category::rather_overconfident || a.category == Category::strongly_overconfident;
        t.uc_subjects +=
            a.category == Category::rather_underconfident || a.category == Category::strongly_underconfident;
      }
      if (a.risk) {
        ++t.risk[a.risk->attitude];
        t.weakly_identified_risk += a.risk->weakly_identified;
      }
      t.degenerate_plans += a.degenerate_plan;
    }
    t.rounds = mean_sd(rounds);
    t.value = mean_sd(value);
    t.earnings = mean_sd(earnings);
    t.crash_rate = double(crashed) / double(t.sessions);
    t.oc = mean_sd(oc);
    t.uc = mean_sd(uc);
    t.opt = mean_sd(opt);
    const auto over = overflight_sample(groups[g], MwMode::junction);
    t.overflight = mean_sd(over);
    if (t.counted_subjects > 0) {
      t.oc_binom_p = binom_test_geq(t.oc_subjects, t.counted_subjects, opts.binom_p0);
      t.uc_binom_p = binom_test_geq(t.uc_subjects, t.counted_subjects, opts.binom_p0);
    }
    t.kw_oc_by_risk = kw_by_risk(groups[g], true);
    t.kw_uc_by_risk = kw_by_risk(groups[g], false);
    r.treatments.push_back(std::move(t));
  }

  const auto& h = r.hot_hand;
  if (h.situations() > 0) {
    r.fallacy_share = double(h.hot_oc) / double(h.situations());
    r.fallacy_binom_p = binom_test_geq(h.hot_oc, h.situations(), opts.binom_p0);
  }
  try {
    r.hot_hand_chi2 = chi2_2x2(h.no_hot_not_oc, h.no_hot_oc, h.hot_not_oc, h.hot_oc);
  } catch (const DomainError&) {
    r.hot_hand_chi2.reset();
  }

  const auto closed_over = overflight_sample(groups[0], opts.mw_mode);
  const auto open_over = overflight_sample(groups[1], opts.mw_mode);
  if (!closed_over.empty() && !open_over.empty())
    r.overflight_mw = mann_whitney(closed_over, open_over, opts.mw_method);
  const auto closed_risk = risk_codes(groups[0]), open_risk = risk_codes(groups[1]);
  if (!closed_risk.empty() && !open_risk.empty()) r.risk_ks = ks_two_sample(closed_risk, open_risk);
  return r;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pct(long long k, long long n) { return n > 0 ? fmt("%.2f%%", 100.0 * double(k) / double(n)) : "-"; }

std::string describe(const std::optional<TestResult>& t) {
  if (!t) return "n/a";
  std::string s = t->method + ": statistic=" + fmt("%.4f", t->statistic);
  if (t->z) s += " z=" + fmt("%.3f", *t->z);
  if (t->df) s += " df=" + std::to_string(*t->df);
  return s + " p=" + fmt("%.4g", t->p_value);
}

void row(std::ostream& os, const std::string& label, const std::vector<std::string>& cells) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%-26s", label.c_str());
  os << buf;
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%18s", c.c_str());
    os << buf;
  }
  os << '\n';
}

}  // namespace

void write_report_text(std::ostream& os, const SummaryReport& r) {
  std::vector<std::string> head;
  for (const auto& t : r.treatments) head.push_back(std::string(to_string(t.treatment)) + " loop");
  auto ms = [](const MeanSd& m) { return fmt("%.2f", m.mean) + " (" + fmt("%.2f", m.sd) + ")"; };
  auto ms4 = [](const MeanSd& m) { return fmt("%.4f", m.mean) + " (" + fmt("%.4f", m.sd) + ")"; };
  auto each = [&](auto f) {
    std::vector<std::string> cells;
    for (const auto& t : r.treatments) cells.push_back(f(t));
    return cells;
  };

  os << "Outcomes by treatment, mean (sd)\n";
  row(os, "", head);
  row(os, "sessions", each([](const TreatmentSummary& t) { return std::to_string(t.sessions); }));
  row(os, "rounds per junction", each([&](const TreatmentSummary& t) { return ms(t.rounds); }));
  row(os, "total value (Taler)", each([&](const TreatmentSummary& t) { return ms(t.value); }));
  row(os, "earnings (EUR)", each([&](const TreatmentSummary& t) { return ms(t.earnings); }));
  row(os, "crash rate", each([](const TreatmentSummary& t) { return fmt("%.2f%%", 100.0 * t.crash_rate); }));

  os << "\nConfidence degrees, mean (sd)\n";
  row(os, "", head);
  row(os, "overconfidence", each([&](const TreatmentSummary& t) { return ms4(t.oc); }));
  row(os, "underconfidence", each([&](const TreatmentSummary& t) { return ms4(t.uc); }));
  row(os, "optimizing", each([&](const TreatmentSummary& t) { return ms4(t.opt); }));
  row(os, "rounds beyond optimum", each([&](const TreatmentSummary& t) { return ms(t.overflight); }));

  os << "\nBehavior categories, count (share of treatment)\n";
  row(os, "", head);
  for (auto c : kCategories)
    row(os, to_string(c), each([&](const TreatmentSummary& t) {
          const auto it = t.categories.find(c);
          const long long k = it == t.categories.end() ? 0 : it->second;
          return std::to_string(k) + " (" + pct(k, static_cast<long long>(t.sessions)) + ")";
        }));

  const auto& h = r.hot_hand;
  os << "\nHot hand, closed-loop junctions with at least one flight\n";
  row(os, "", {"not overconfident", "overconfident", "total"});
  row(os, "no hot hand", {std::to_string(h.no_hot_not_oc), std::to_string(h.no_hot_oc),
                          std::to_string(h.no_hot_not_oc + h.no_hot_oc)});
  row(os, "hot hand", {std::to_string(h.hot_not_oc), std::to_string(h.hot_oc), std::to_string(h.situations())});
  row(os, "total", {std::to_string(h.no_hot_not_oc + h.hot_not_oc), std::to_string(h.no_hot_oc + h.hot_oc),
                    std::to_string(h.no_hot_not_oc + h.no_hot_oc + h.situations())});
  os << "chi-square: " << describe(r.hot_hand_chi2) << '\n';
  os << "fallacy share: " << (h.situations() ? pct(h.hot_oc, h.situations()) : "-")
     << "  binomial P(X >= k | p0=" << fmt("%g", r.options.binom_p0) << ") = " << fmt("%.4g", r.fallacy_binom_p)
     << '\n';

  os << "\nRisk attitude, count (share of treatment)\n";
  row(os, "", head);
  for (auto c : kRiskClasses)
    row(os, to_string(c), each([&](const TreatmentSummary& t) {
          const auto it = t.risk.find(c);
          const long long k = it == t.risk.end() ? 0 : it->second;
          long long n = 0;
          for (const auto& [_, v] : t.risk) n += v;
          return std::to_string(k) + " (" + pct(k, n) + ")";
        }));
  row(os, "weakly identified", each([](const TreatmentSummary& t) { return std::to_string(t.weakly_identified_risk); }));

  os << "\nTests\n";
  for (const auto& t : r.treatments) {
    const std::string name = to_string(t.treatment);
    os << name << ": overconfident subjects " << t.oc_subjects << "/" << t.counted_subjects
       << ", binomial p=" << fmt("%.4g", t.oc_binom_p) << "; underconfident " << t.uc_subjects << "/"
       << t.counted_subjects << ", binomial p=" << fmt("%.4g", t.uc_binom_p) << '\n';
    os << name << ": overconfidence by risk attitude " << describe(t.kw_oc_by_risk) << '\n';
    os << name << ": underconfidence by risk attitude " << describe(t.kw_uc_by_risk) << '\n';
    if (t.degenerate_plans) os << name << ": degenerate plans (no flights) " << t.degenerate_plans << '\n';
  }
  os << "rounds beyond optimum, closed vs open ("
     << (r.options.mw_mode == MwMode::junction ? "junction level" : "subject means")
     << "): " << describe(r.overflight_mw) << '\n';
  os << "risk distribution, closed vs open: " << describe(r.risk_ks) << '\n';
}

void write_report_tsv(std::ostream& os, const SummaryReport& r) {
  os << "table\trow\tcolumn\tvalue\n";
  auto put = [&](const std::string& table, const std::string& rw, const std::string& col, const std::string& v) {
    os << table << '\t' << rw << '\t' << col << '\t' << v << '\n';
  };
  auto num = [](double v) { return fmt("%.6g", v); };
  auto put_ms = [&](const std::string& table, const std::string& rw, const std::string& col, const MeanSd& m) {
    put(table, rw + "_mean", col, num(m.mean));
    put(table, rw + "_sd", col, num(m.sd));
  };
  for (const auto& t : r.treatments) {
    const std::string c = to_string(t.treatment);
    put("outcomes", "sessions", c, std::to_string(t.sessions));
    put_ms("outcomes", "rounds", c, t.rounds);
    put_ms("outcomes", "total_value", c, t.value);
    put_ms("outcomes", "earnings_eur", c, t.earnings);
    put("outcomes", "crash_rate", c, num(t.crash_rate));
    put_ms("degrees", "overconfidence", c, t.oc);
    put_ms("degrees", "underconfidence", c, t.uc);
    put_ms("degrees", "optimizing", c, t.opt);
    put_ms("degrees", "rounds_beyond_optimum", c, t.overflight);
    for (auto cat : kCategories) {
      const auto it = t.categories.find(cat);
      put("categories", to_string(cat), c, std::to_string(it == t.categories.end() ? 0 : it->second));
    }
    for (auto rc : kRiskClasses) {
      const auto it = t.risk.find(rc);
      put("risk", to_string(rc), c, std::to_string(it == t.risk.end() ? 0 : it->second));
    }
    put("risk", "weakly_identified", c, std::to_string(t.weakly_identified_risk));
    put("tests", "binom_overconfident_subjects", c, std::to_string(t.oc_subjects));
    put("tests", "binom_counted_subjects", c, std::to_string(t.counted_subjects));
    put("tests", "binom_overconfident_p", c, num(t.oc_binom_p));
    put("tests", "binom_underconfident_subjects", c, std::to_string(t.uc_subjects));
    put("tests", "binom_underconfident_p", c, num(t.uc_binom_p));
    if (t.kw_oc_by_risk) {
      put("tests", "kw_overconfidence_by_risk_h", c, num(t.kw_oc_by_risk->statistic));
      put("tests", "kw_overconfidence_by_risk_p", c, num(t.kw_oc_by_risk->p_value));
    }
    if (t.kw_uc_by_risk) {
      put("tests", "kw_underconfidence_by_risk_h", c, num(t.kw_uc_by_risk->statistic));
      put("tests", "kw_underconfidence_by_risk_p", c, num(t.kw_uc_by_risk->p_value));
    }
  }
  const auto& h = r.hot_hand;
  put("hot_hand", "no_hot_hand", "not_overconfident", std::to_string(h.no_hot_not_oc));
  put("hot_hand", "no_hot_hand", "overconfident", std::to_string(h.no_hot_oc));
  put("hot_hand", "hot_hand", "not_overconfident", std::to_string(h.hot_not_oc));
  put("hot_hand", "hot_hand", "overconfident", std::to_string(h.hot_oc));
  if (r.hot_hand_chi2) {
    put("tests", "hot_hand_chi2", "all", num(r.hot_hand_chi2->statistic));
    put("tests", "hot_hand_chi2_p", "all", num(r.hot_hand_chi2->p_value));
  }
  put("tests", "fallacy_share", "closed", num(r.fallacy_share));
  put("tests", "fallacy_binom_p", "closed", num(r.fallacy_binom_p));
  if (r.overflight_mw) {
    put("tests", "overflight_mw_u", "all", num(r.overflight_mw->statistic));
    put("tests", "overflight_mw_z", "all", num(r.overflight_mw->z.value_or(0.0)));
    put("tests", "overflight_mw_p", "all", num(r.overflight_mw->p_value));
  }
  if (r.risk_ks) {
    put("tests", "risk_ks_d", "all", num(r.risk_ks->statistic));
    put("tests", "risk_ks_p", "all", num(r.risk_ks->p_value));
  }
}

}  // namespace uavstop
