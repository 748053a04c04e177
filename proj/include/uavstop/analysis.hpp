#pragma once
// Behavioral analysis of completed sessions: junction labels against the
// heuristics, confidence degrees and categories, hot-hand situations, risk
// attitude from the price list, and the summary tables.

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "uavstop/mission.hpp"
#include "uavstop/mpl.hpp"
#include "uavstop/policy.hpp"
#include "uavstop/session_log.hpp"
#include "uavstop/stats.hpp"

namespace uavstop {

enum class Label { overconfident, underconfident, optimal, unobservable };
const char* to_string(Label l);

struct JunctionLabel {
  Label label = Label::unobservable;
  // Closed loop: flights taken at or above the threshold (> 0), or minus the
  // ladder steps still missing when the operator stopped short (< 0).
  // Open loop: planned rounds minus the heuristic plan.
  int rounds_beyond_optimum = 0;
};

// Which closed-loop junctions reveal a decision.
//   standard        everything except a crash on the junction's first flight;
//                   crash- or cap-truncated compliant junctions are optimal
//   decision_point  only junctions where the operator faced the threshold:
//                   a voluntary stop before the round cap, or a flight at or
//                   above the threshold
enum class Observability { standard, decision_point };

enum class MwMode { junction, subject_mean };

struct AnalysisOptions {
  Observability observability = Observability::standard;
  // Open loop: count all advance plans, not just the junctions reached.
  bool count_all_plans = false;
  int streak_len = 3;
  double binom_p0 = 0.05;
  MwMode mw_mode = MwMode::junction;
  MwMethod mw_method = MwMethod::automatic;
};

JunctionLabel label_closed_junction(const JunctionRecord& rec, const MissionConfig& cfg,
                                    Observability obs = Observability::standard);
JunctionLabel label_planned_junction(int planned_rounds, const MissionConfig& cfg);
// Dispatches on the treatment; open loop requires `planned`.
JunctionLabel label_junction(const JunctionRecord& rec, Treatment treatment, const MissionConfig& cfg,
                             std::optional<int> planned = std::nullopt, Observability obs = Observability::standard);

// Labels of every counted junction of a session, in junction order.
std::vector<JunctionLabel> session_labels(const SessionLog& s, const AnalysisOptions& opts = {});

struct ConfidenceDegrees {
  double oc = 0.0, uc = 0.0, opt = 0.0;
  int n_oc = 0, n_uc = 0, n_opt = 0;
  int observed() const { return n_oc + n_uc + n_opt; }
};

ConfidenceDegrees degrees_from_counts(int n_oc, int n_uc, int n_opt);
// nullopt when no junction is observable (the session is excluded).
std::optional<ConfidenceDegrees> confidence_degrees(const SessionLog& s, const AnalysisOptions& opts = {});

enum class Category {
  optimal,
  rather_overconfident,
  strongly_overconfident,
  rather_underconfident,
  strongly_underconfident,
  mixed,
  excluded
};
inline constexpr Category kCategories[] = {Category::optimal,
                                           Category::rather_overconfident,
                                           Category::strongly_overconfident,
                                           Category::rather_underconfident,
                                           Category::strongly_underconfident,
                                           Category::mixed,
                                           Category::excluded};
const char* to_string(Category c);

// "rather" above one third up to one half, "strongly" above one half. When
// both deviations exceed one third the larger wins; an exact tie is mixed.
Category categorize(const ConfidenceDegrees& d);
Category categorize(const std::optional<ConfidenceDegrees>& d);

struct HotHandRecord {
  int junction = 0;
  bool situation = false;  // threshold reached by an unbroken run of >= streak_len increases, still intact
  bool fallacy = false;    // and another flight followed
};

// One record per junction with at least one flight. Throws UnsupportedError
// for open-loop sessions, which get no feedback.
std::vector<HotHandRecord> hot_hand_scan(const SessionLog& s, int streak_len = 3);

enum class RiskClass { risk_averse, risk_neutral, risk_seeking, not_identifiable };
inline constexpr RiskClass kRiskClasses[] = {RiskClass::risk_averse, RiskClass::risk_neutral, RiskClass::risk_seeking,
                                             RiskClass::not_identifiable};
const char* to_string(RiskClass r);

struct RiskAttitude {
  RiskClass attitude = RiskClass::not_identifiable;
  std::optional<int> switch_row;  // first A of the terminal run of A's
  int switches = 0;
  bool weakly_identified = false;  // two switches, or A before a later B
};

// Neutral when the terminal switch is at row 17 (B through row 16, where
// both options are worth 15 euros in expectation). Throws DomainError unless
// there are exactly 20 choices.
inline constexpr int kNeutralSwitchRow = 17;
RiskAttitude classify_risk(std::span<const MplChoice> choices);

// Counts of the 2x2 hot-hand table.
struct HotHandTable {
  long long no_hot_not_oc = 0, no_hot_oc = 0;
  long long hot_not_oc = 0, hot_oc = 0;
  long long situations() const { return hot_not_oc + hot_oc; }
};

struct SessionAnalysis {
  std::string session_id;
  Treatment treatment = Treatment::closed;
  std::string agent;
  std::vector<JunctionLabel> labels;
  std::optional<ConfidenceDegrees> degrees;
  Category category = Category::excluded;
  std::vector<HotHandRecord> hot_hand;  // closed loop only
  std::optional<RiskAttitude> risk;
  double mean_rounds = 0.0;  // flights per junction played
  int junctions_played = 0;
  bool degenerate_plan = false;  // open loop, no flights planned at all
};

SessionAnalysis analyze_session(const SessionLog& s, const AnalysisOptions& opts = {});

struct MeanSd {
  double mean = 0.0, sd = 0.0;
  std::size_t n = 0;
};
MeanSd mean_sd(std::span<const double> xs);

struct TreatmentSummary {
  Treatment treatment = Treatment::closed;
  std::size_t sessions = 0;
  MeanSd rounds, value, earnings;  // earnings from the mission alone, in euros
  double crash_rate = 0.0;
  MeanSd oc, uc, opt;  // over sessions that are not excluded
  std::map<Category, long long> categories;
  std::map<RiskClass, long long> risk;
  std::size_t weakly_identified_risk = 0;
  std::size_t degenerate_plans = 0;
  MeanSd overflight;  // rounds beyond the optimum at overconfident junctions
  // Sessions categorized rather/strongly over- (under-) confident against the
  // null share binom_p0.
  long long oc_subjects = 0, uc_subjects = 0, counted_subjects = 0;
  double oc_binom_p = 1.0, uc_binom_p = 1.0;
  std::optional<TestResult> kw_oc_by_risk, kw_uc_by_risk;
};

struct SummaryReport {
  AnalysisOptions options;
  std::vector<SessionAnalysis> sessions;
  std::vector<TreatmentSummary> treatments;  // closed first, only those present
  HotHandTable hot_hand;
  std::optional<TestResult> hot_hand_chi2;  // absent on a degenerate table
  double fallacy_share = 0.0;
  double fallacy_binom_p = 1.0;
  std::optional<TestResult> overflight_mw;  // closed vs open
  std::optional<TestResult> risk_ks;        // closed vs open risk codes
};

// Throws DomainError on an empty session list.
SummaryReport summarize(std::span<const SessionLog> sessions, const AnalysisOptions& opts = {});

void write_report_text(std::ostream& os, const SummaryReport& r);
// Long format, one value per line: table, row, column, value.
void write_report_tsv(std::ostream& os, const SummaryReport& r);

}  // namespace uavstop
