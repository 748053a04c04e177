// uavstop: solve, evaluate, simulate, synthesize, analyze, serve.
//
// Exit codes: 0 success, 1 internal failure, 2 bad configuration or input.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "uavstop/agents.hpp"
#include "uavstop/analysis.hpp"
#include "uavstop/config.hpp"
#include "uavstop/dp.hpp"
#include "uavstop/errors.hpp"
#include "uavstop/evaluation.hpp"
#include "uavstop/http_api.hpp"
#include "uavstop/service.hpp"
#include "uavstop/session_log.hpp"

using namespace uavstop;

namespace {

enum class Format { text, tabular };

struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out_path;
  Format format = Format::text;
};

// A bad request from the operator: exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

MissionConfig mission_config(const Common& c) {
  return c.config_path.empty() ? MissionConfig{} : load_config(c.config_path);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw UsageError("cannot write '" + path + "'");
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// agent:<kind>[,option=value...], options as in population files.
BiasProfile parse_agent(const std::string& text, const MissionConfig& cfg) {
  std::string body = text.substr(text.find(':') + 1);
  for (char& ch : body)
    if (ch == ',') ch = ' ';
  std::istringstream kind_stream(body);
  std::string kind, options;
  kind_stream >> kind;
  std::getline(kind_stream, options);
  std::istringstream line("agent = " + kind + " closed 1 " + options);
  return parse_population(line, cfg).groups.at(0).profile;
}

struct NamedPolicy {
  std::string name;
  std::unique_ptr<Policy> policy;
};

NamedPolicy make_named_policy(const std::string& name, Treatment treatment, const MissionConfig& cfg) {
  if (name == "closed-heuristic") return {name, std::make_unique<ClosedLoopHeuristic>(cfg)};
  if (name == "open-heuristic") return {name, make_open_heuristic(cfg)};
  if (name == "always-max") return {name, make_always_fly_max(cfg)};
  if (name == "dp") return {name, std::make_unique<DpPolicy>(std::make_shared<const DpTable>(solve_dp(cfg)))};
  if (name.rfind("agent:", 0) == 0) {
    const auto profile = parse_agent(name, cfg);
    return {profile.label() + "/" + to_string(treatment), make_policy(profile, treatment, cfg)};
  }
  throw UsageError("unknown policy '" + name + "'");
}

const std::vector<std::string> kDefaultPolicies{"dp", "closed-heuristic", "open-heuristic", "always-max"};

int cmd_solve(const Common& c) {
  const auto cfg = mission_config(c);
  const auto table = solve_dp(cfg);
  const auto diffs = dp_vs_heuristic(table);
  Output out(c.out_path);
  auto& os = out.os();
  if (c.format == Format::tabular) {
    os << export_dp_table(table);
    return 0;
  }
  os << "optimal expected value: " << fmt(table.expected_total(), 4) << " Taler\n"
     << "bellman residual: " << bellman_residual(table) << "\n"
     << "myopic threshold: " << myopic_threshold(cfg) << "\n"
     << "states where the optimum departs from the myopic rule: " << diffs.size() << "\n";
  for (const auto& d : diffs)
    os << "  junction " << d.junction << " round " << d.rounds << " sigma " << d.sigma << ": optimum "
       << (d.dp_fly ? "fly" : "stop") << ", myopic " << (d.heuristic_fly ? "fly" : "stop") << "\n";
  return 0;
}

int cmd_evaluate(const Common& c, const std::vector<std::string>& names, Treatment treatment) {
  const auto cfg = mission_config(c);
  Output out(c.out_path);
  auto& os = out.os();
  if (c.format == Format::tabular) os << "policy\tmetric\tvalue\n";
  for (const auto& name : names.empty() ? kDefaultPolicies : names) {
    const auto p = make_named_policy(name, treatment, cfg);
    const auto e = evaluate_policy_exact(*p.policy, cfg);
    if (c.format == Format::tabular) {
      os << p.name << "\texpected_value\t" << fmt(e.expected_value, 9) << "\n"
         << p.name << "\tsurvival_prob\t" << fmt(e.survival_prob, 9) << "\n"
         << p.name << "\texpected_info\t" << fmt(e.expected_info, 9) << "\n"
         << p.name << "\texpected_flights\t" << fmt(e.expected_flights, 9) << "\n";
      for (std::size_t j = 0; j < e.reach_prob.size(); ++j)
        os << p.name << "\treach_prob_" << j + 1 << "\t" << fmt(e.reach_prob[j], 9) << "\n";
    } else {
      os << p.name << ": E[V] = " << fmt(e.expected_value, 4) << ", survival = " << fmt(e.survival_prob, 4)
         << ", E[info] = " << fmt(e.expected_info, 4) << ", E[flights] = " << fmt(e.expected_flights, 4) << "\n";
    }
  }
  return 0;
}

int cmd_simulate(const Common& c, const std::vector<std::string>& names, Treatment treatment, std::int64_t n,
                 unsigned threads) {
  const auto cfg = mission_config(c);
  Output out(c.out_path);
  auto& os = out.os();
  if (c.format == Format::tabular) os << "policy\tmetric\tvalue\n";
  for (const auto& name : names.empty() ? kDefaultPolicies : names) {
    const auto p = make_named_policy(name, treatment, cfg);
    const auto s = simulate_missions(*p.policy, cfg, c.seed, n, threads);
    if (c.format == Format::tabular) {
      const std::vector<std::pair<const char*, std::string>> rows{
          {"n_missions", std::to_string(s.n_missions)},
          {"mean_value", fmt(s.mean_value, 9)},
          {"std_value", fmt(s.std_value, 9)},
          {"std_error", fmt(s.std_error, 9)},
          {"mean_rounds_per_junction", fmt(s.mean_rounds_per_junction, 9)},
          {"mean_junctions_played", fmt(s.mean_junctions_played, 9)},
          {"crash_rate", fmt(s.crash_rate, 9)}};
      for (const auto& [k, v] : rows) os << p.name << "\t" << k << "\t" << v << "\n";
      for (const auto& [info, count] : s.junction_info_counts)
        os << p.name << "\tjunctions_banking_" << info << "\t" << count << "\n";
    } else {
      os << p.name << ": n = " << s.n_missions << ", mean V = " << fmt(s.mean_value, 3) << " (se "
         << fmt(s.std_error, 3) << ", sd " << fmt(s.std_value, 3) << "), crash rate = " << fmt(s.crash_rate, 4)
         << ", rounds/junction = " << fmt(s.mean_rounds_per_junction, 3)
         << ", junctions played = " << fmt(s.mean_junctions_played, 3) << "\n";
    }
  }
  return 0;
}

int cmd_synth(const Common& c, const std::string& population_path) {
  const auto cfg = mission_config(c);
  std::ifstream in(population_path);
  if (!in) throw UsageError("cannot open population file '" + population_path + "'");
  const auto spec = parse_population(in, cfg);
  const auto sessions = generate_sessions(spec, cfg, c.seed_given ? c.seed : spec.seed);
  Output out(c.out_path);
  write_sessions_jsonl(out.os(), sessions);
  return 0;
}

int cmd_analyze(const Common& c, const std::string& in_path, const AnalysisOptions& opts) {
  std::ifstream in(in_path);
  if (!in) throw UsageError("cannot open session file '" + in_path + "'");
  const auto sessions = read_sessions_jsonl(in);
  if (sessions.empty()) throw UsageError("no sessions in '" + in_path + "'");
  const auto report = summarize(sessions, opts);
  Output out(c.out_path);
  if (c.format == Format::tabular)
    write_report_tsv(out.os(), report);
  else
    write_report_text(out.os(), report);
  return 0;
}

HttpApi* g_api = nullptr;

extern "C" void on_signal(int) {
  if (g_api) g_api->stop();
}

int cmd_serve(const Common& c, const std::string& host, int port, const std::string& data_dir) {
  ServiceOptions opts;
  opts.mission = mission_config(c);
  opts.seed = c.seed;
  opts.data_dir = data_dir;
  ExperimentService service(std::move(opts));
  HttpApi api(service);
  const int bound = api.bind(host, port);
  if (bound < 0) throw UsageError("cannot bind " + host + ":" + std::to_string(port));
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  g_api = &api;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  api.listen();
  g_api = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drone monitoring stopping task: solver, simulator, agents, analysis and experiment server"};
  app.require_subcommand(1);
  Common common;
  std::string format = "text";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "key = value mission configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--out", common.out_path, "output file (default stdout)");
    sub->add_option("--format", format, "text or tabular")->check(CLI::IsMember({"text", "tabular"}));
  };

  std::vector<std::string> policies;
  std::string treatment = "closed";
  auto add_policy = [&](CLI::App* sub) {
    sub->add_option("--policy", policies,
                    "closed-heuristic, open-heuristic, dp, always-max or agent:<kind>[,key=value...]; repeatable");
    sub->add_option("--treatment", treatment, "treatment for agent policies")
        ->check(CLI::IsMember({"closed", "open"}));
  };

  auto* solve = app.add_subcommand("solve", "backward induction table and its departures from the myopic rule");
  add_common(solve);
  auto* evaluate = app.add_subcommand("evaluate", "exact expected value of policies");
  add_common(evaluate);
  add_policy(evaluate);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo policy statistics");
  add_common(simulate);
  add_policy(simulate);
  std::int64_t n_missions = 100000;
  unsigned threads = 0;
  simulate->add_option("-n,--missions", n_missions, "number of missions")->check(CLI::PositiveNumber);
  simulate->add_option("--threads", threads, "worker threads (0: hardware concurrency)");

  auto* synth = app.add_subcommand("synth", "synthetic session log from a population file");
  add_common(synth);
  std::string population;
  synth->add_option("--population", population, "population file")->required()->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "summary tables from a session log");
  add_common(analyze);
  std::string in_path, observability = "standard", mw_mode = "junction";
  AnalysisOptions aopts;
  analyze->add_option("--in", in_path, "sessions.jsonl")->required()->check(CLI::ExistingFile);
  analyze->add_option("--observability", observability, "standard or decision_point")
      ->check(CLI::IsMember({"standard", "decision_point"}));
  analyze->add_option("--streak-len", aopts.streak_len, "increases that make a hot-hand situation")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--binom-p0", aopts.binom_p0, "null share for the binomial tests")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--mw-mode", mw_mode, "junction or subject_mean")
      ->check(CLI::IsMember({"junction", "subject_mean"}));
  analyze->add_flag("--count-all-plans", aopts.count_all_plans, "label open-loop plans past a crash too");

  auto* serve = app.add_subcommand("serve", "run the experiment server");
  add_common(serve);
  std::string host = "127.0.0.1", data_dir;
  int port = 8080;
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port (0: any free port)")->check(CLI::Range(0, 65535));
  serve->add_option("--data-dir", data_dir, "directory for events.jsonl and sessions.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto* sub : app.get_subcommands())
    common.seed_given = sub->count("--seed") > 0;
  common.format = format == "tabular" ? Format::tabular : Format::text;

  try {
    const Treatment t = parse_treatment(treatment);
    if (*solve) return cmd_solve(common);
    if (*evaluate) return cmd_evaluate(common, policies, t);
    if (*simulate) return cmd_simulate(common, policies, t, n_missions, threads);
    if (*synth) return cmd_synth(common, population);
    if (*analyze) {
      aopts.observability = observability == "decision_point" ? Observability::decision_point : Observability::standard;
      aopts.mw_mode = mw_mode == "subject_mean" ? MwMode::subject_mean : MwMode::junction;
      return cmd_analyze(common, in_path, aopts);
    }
    if (*serve) return cmd_serve(common, host, port, data_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
