#include "uavstop/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "uavstop/errors.hpp"

namespace uavstop {
namespace {

class JunctionExpander {
 public:
  JunctionExpander(Policy& policy, const MissionConfig& cfg) : policy_(policy), cfg_(cfg) {}

  void expand(const MissionState& st, double prob) {
    const bool legal = st.rounds_flown_here < cfg_.max_rounds && st.sigma < cfg_.rho.top();
    const auto ctx = make_context(st, history_, policy_.needs_feedback());
    if (!legal || !policy_.decide(ctx, unused_)) {
      out.push_back({st.sigma, st.rounds_flown_here, false, prob});
      return;
    }
    const double q = st.rounds_flown_here == 0 ? 1.0 : cfg_.increase_prob;
    const double r = cfg_.crash_prob;
    for (const bool inc : {true, false}) {
      const double p_inc = inc ? q : 1.0 - q;
      if (p_inc == 0.0) continue;
      for (const bool crash : {true, false}) {
        const double p_crash = crash ? r : 1.0 - r;
        if (p_crash == 0.0) continue;
        const auto step = fly_once(st, cfg_, FlightDraw{inc, crash});
        const double branch = prob * p_inc * p_crash;
        if (crash) {
          out.push_back({step.outcome.sigma_after, step.outcome.round, true, branch});
        } else {
          history_.push_back(step.outcome);
          expand(step.state, branch);
          history_.pop_back();
        }
      }
    }
  }

  std::vector<JunctionBranch> out;

 private:
  Policy& policy_;
  const MissionConfig& cfg_;
  std::vector<FlightOutcome> history_;
  Rng unused_{0};
};

}  // namespace

std::vector<JunctionBranch> junction_distribution(const Policy& policy, const MissionConfig& cfg, int junction) {
  cfg.validate();
  if (!policy.deterministic()) throw UnsupportedError("exact evaluation needs a deterministic policy");
  if (junction < 1 || junction > cfg.num_junctions) throw DomainError("junction out of range");
  auto pol = policy.clone();
  Rng unused(0);
  pol->begin_junction(junction, unused);
  JunctionExpander ex(*pol, cfg);
  MissionState start;
  start.junction = junction;
  ex.expand(start, 1.0);
  return std::move(ex.out);
}

ExactEvaluation evaluate_policy_exact(const Policy& policy, const MissionConfig& cfg) {
  ExactEvaluation ev;
  double reach = 1.0;
  for (int j = 1; j <= cfg.num_junctions; ++j) {
    ev.reach_prob.push_back(reach);
    double info = 0.0, survive = 0.0, flights = 0.0;
    for (const auto& b : junction_distribution(policy, cfg, j)) {
      info += b.prob * static_cast<double>(b.sigma);
      flights += b.prob * b.flights;
      if (!b.crashed) survive += b.prob;
    }
    ev.expected_info += reach * info;
    ev.expected_flights += reach * flights;
    reach *= survive;
  }
  ev.survival_prob = reach;
  ev.expected_value = ev.expected_info + reach * static_cast<double>(cfg.drone_value);
  return ev;
}

namespace {

struct Tally {
  std::int64_t missions = 0;
  std::int64_t value_sum = 0;
  std::int64_t value_sq_sum = 0;
  std::int64_t flights = 0;
  std::int64_t junctions = 0;
  std::int64_t crashes = 0;
  std::map<Taler, std::int64_t> info_counts;

  void add(const MissionLog& log) {
    ++missions;
    value_sum += log.total_value;
    value_sq_sum += log.total_value * log.total_value;
    if (!log.intact) ++crashes;
    for (const auto& j : log.junctions) {
      ++junctions;
      flights += static_cast<std::int64_t>(j.flights.size());
      ++info_counts[j.info];
    }
  }

  void merge(const Tally& o) {
    missions += o.missions;
    value_sum += o.value_sum;
    value_sq_sum += o.value_sq_sum;
    flights += o.flights;
    junctions += o.junctions;
    crashes += o.crashes;
    for (const auto& [k, v] : o.info_counts) info_counts[k] += v;
  }
};

constexpr std::int64_t kChunk = 2048;

}  // namespace

PolicyStats simulate_missions(const Policy& policy, const MissionConfig& cfg, std::uint64_t seed,
                              std::int64_t n_missions, unsigned threads) {
  cfg.validate();
  if (n_missions < 1) throw DomainError("n_missions must be >= 1");
  const std::int64_t n_chunks = (n_missions + kChunk - 1) / kChunk;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, n_chunks));

  // Integer tallies make the reduction exact and independent of scheduling.
  std::vector<Tally> per_worker(threads);
  std::atomic<std::int64_t> next_chunk{0};
  auto worker = [&](unsigned w) {
    auto pol = policy.clone();
    for (std::int64_t c = next_chunk++; c < n_chunks; c = next_chunk++) {
      const std::int64_t end = std::min(n_missions, (c + 1) * kChunk);
      for (std::int64_t k = c * kChunk; k < end; ++k) {
        Rng dynamics(derive_seed(seed, static_cast<std::uint64_t>(k), 1));
        Rng policy_rng(derive_seed(seed, static_cast<std::uint64_t>(k), 2));
        per_worker[w].add(run_mission(*pol, cfg, dynamics, policy_rng));
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  Tally total;
  for (const auto& t : per_worker) total.merge(t);

  PolicyStats s;
  s.n_missions = total.missions;
  const auto n = static_cast<double>(total.missions);
  s.mean_value = static_cast<double>(total.value_sum) / n;
  if (total.missions > 1) {
    const double ss = static_cast<double>(total.value_sq_sum) - n * s.mean_value * s.mean_value;
    s.std_value = std::sqrt(std::max(0.0, ss) / (n - 1.0));
  }
  s.std_error = s.std_value / std::sqrt(n);
  s.mean_rounds_per_junction = total.junctions ? static_cast<double>(total.flights) / total.junctions : 0.0;
  s.mean_junctions_played = static_cast<double>(total.junctions) / n;
  s.crash_rate = static_cast<double>(total.crashes) / n;
  s.junction_info_counts = std::move(total.info_counts);
  return s;
}

}  // namespace uavstop
