#include <cmath>
#include <functional>
#include <map>

#include "doctest.h"
#include "uavstop/dp.hpp"
#include "uavstop/errors.hpp"
#include "uavstop/evaluation.hpp"
#include "uavstop/policy.hpp"

using namespace uavstop;

namespace {

DecisionContext ctx_at(int j, int i, Taler sigma, bool intact = true) {
  DecisionContext c;
  c.junction = j;
  c.rounds_flown_here = i;
  c.sigma = sigma;
  c.intact = intact;
  return c;
}

// Brute-force expectimax over the outcome tree of one junction, with the
// value of arriving at the next junction given. No tables, no shared code
// with the solver beyond the ladder.
struct Expectimax {
  const MissionConfig& cfg;
  double next_start;

  double best(int i, Taler s) const { return std::max(stop(s), fly(i, s)); }
  double stop(Taler s) const { return double(s) + next_start; }
  double fly(int i, Taler s) const {
    if (i >= cfg.max_rounds || s >= cfg.rho.top()) return -1e300;
    const double q = i == 0 ? 1.0 : cfg.increase_prob, r = cfg.crash_prob;
    const Taler up = s + cfg.rho.increments()[*cfg.rho.index_of(s)];
    double v = q * ((1 - r) * best(i + 1, up) + r * double(up));
    if (q < 1.0) v += (1 - q) * ((1 - r) * best(i + 1, s) + r * double(s));
    return v;
  }
};

// Start-of-junction values from the last junction backwards.
std::vector<double> oracle_starts(const MissionConfig& cfg) {
  std::vector<double> start(cfg.num_junctions + 2, 0.0);
  start[cfg.num_junctions + 1] = double(cfg.drone_value);
  for (int j = cfg.num_junctions; j >= 1; --j) start[j] = Expectimax{cfg, start[j + 1]}.best(0, 0);
  return start;
}

}  // namespace

TEST_CASE("marginal gain table") {
  const MissionConfig cfg;
  CHECK(marginal_gain(25, cfg) == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(marginal_gain(50, cfg) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(marginal_gain(70, cfg) == doctest::Approx(-3.0).epsilon(1e-12));
  for (Taler s : {80, 85, 90, 95}) CHECK(marginal_gain(s, cfg) == doctest::Approx(-5.5).epsilon(1e-12));
  CHECK(marginal_gain(0, cfg, FirstRound::uniform) == doctest::Approx(4.5));
  CHECK(marginal_gain(0, cfg, FirstRound::certain) == doctest::Approx(17.0));
  CHECK_THROWS_AS(marginal_gain(100, cfg), DomainError);
  CHECK(myopic_threshold(cfg) == 70);
}

TEST_CASE("closed-loop heuristic") {
  const MissionConfig cfg;
  CHECK(closed_loop_decide(ctx_at(1, 2, 50), cfg));
  CHECK_FALSE(closed_loop_decide(ctx_at(1, 3, 70), cfg));
  CHECK_FALSE(closed_loop_decide(ctx_at(1, 8, 25), cfg));
  CHECK_FALSE(closed_loop_decide(ctx_at(1, 2, 50, false), cfg));
  auto blind = ctx_at(1, 2, 50);
  blind.feedback_available = false;
  blind.sigma.reset();
  CHECK_THROWS_AS(closed_loop_decide(blind, cfg), ProtocolError);

  // agrees with the sign of the one-step gain wherever flying is allowed
  for (int i = 0; i < cfg.max_rounds; ++i)
    for (Taler s : cfg.rho.values()) {
      if (s == cfg.rho.top()) continue;
      CHECK(closed_loop_decide(ctx_at(1, i, s), cfg) == (marginal_gain(s, cfg) > 0));
    }
}

TEST_CASE("open-loop heuristic plan") {
  MissionConfig cfg;
  CHECK(open_loop_heuristic_plan(cfg).planned_rounds == std::vector<int>(10, 5));
  cfg.num_junctions = 1;
  CHECK(open_loop_heuristic_plan(cfg).planned_rounds == std::vector<int>{5});

  OpenLoopPlan bad{{5, 5}};
  CHECK_THROWS_AS(bad.validate(MissionConfig{}), ValidationError);
  OpenLoopPlan too_many{std::vector<int>(10, 9)};
  CHECK_THROWS_AS(too_many.validate(MissionConfig{}), ValidationError);
}

TEST_CASE("enumeration facts against brute force") {
  MissionConfig no_crash;
  no_crash.crash_prob = 0.0;

  // Oracle: every sequence of later-round increases, applied by hand.
  double reach70 = 0, flights = 0;
  for (int mask = 0; mask < 128; ++mask) {
    int idx = 1, f = 1;  // first picture at 25
    for (int k = 0; k < 7 && idx < 3; ++k, ++f) idx += (mask >> k) & 1;
    reach70 += idx >= 3;
    flights += f;
  }
  reach70 /= 128;
  flights /= 128;
  CHECK(reach70 == 0.9375);
  CHECK(flights == 4.859375);

  double open_info = 0;
  const Taler ladder[] = {0, 25, 50, 70, 80, 85};
  for (int mask = 0; mask < 16; ++mask) open_info += double(ladder[1 + __builtin_popcount(mask)]);
  open_info /= 16;
  CHECK(open_info == 65.625);

  ClosedLoopHeuristic closed(MissionConfig{});  // default-parameter rule, crash-free dynamics
  double p70 = 0, ef = 0;
  for (const auto& b : junction_distribution(closed, no_crash, 1)) {
    if (b.sigma >= 70) p70 += b.prob;
    ef += b.prob * b.flights;
    CHECK_FALSE(b.crashed);
  }
  CHECK(p70 == doctest::Approx(reach70).epsilon(1e-14));
  CHECK(ef == doctest::Approx(flights).epsilon(1e-14));

  auto open = make_open_heuristic(MissionConfig{});
  double info = 0;
  for (const auto& b : junction_distribution(*open, no_crash, 4)) info += b.prob * double(b.sigma);
  CHECK(info == doctest::Approx(open_info).epsilon(1e-14));
}

TEST_CASE("exact survival probabilities") {
  const MissionConfig cfg;
  CHECK(evaluate_policy_exact(*make_open_heuristic(cfg), cfg).survival_prob ==
        doctest::Approx(std::pow(0.98, 50)).epsilon(1e-12));
  CHECK(evaluate_policy_exact(*make_always_fly_max(cfg), cfg).survival_prob ==
        doctest::Approx(std::pow(0.98, 80)).epsilon(1e-12));
  CHECK(std::pow(0.98, 80) == doctest::Approx(0.1986).epsilon(1e-3));
}

TEST_CASE("DP solution matches brute-force expectimax") {
  const MissionConfig cfg;
  const auto table = solve_dp(cfg);
  const auto starts = oracle_starts(cfg);
  CHECK(table.expected_total() == doctest::Approx(starts[1]).epsilon(1e-12));
  for (int j = 1; j <= cfg.num_junctions; ++j) {
    const Expectimax ex{cfg, starts[j + 1]};
    for (int i = 0; i <= cfg.max_rounds; ++i)
      for (Taler s : cfg.rho.values()) {
        if (!table.contains(j, i, s)) continue;
        CHECK(table.value(j, i, s) == doctest::Approx(ex.best(i, s)).epsilon(1e-12));
        CHECK(table.fly(j, i, s) == (ex.fly(i, s) > ex.stop(s) + 1e-9));
      }
  }
  CHECK(bellman_residual(table) < 1e-9);

  // last junction at 70: stop
  CHECK_FALSE(table.fly(10, 3, 70));
  CHECK_FALSE(dp_decide(table, ctx_at(10, 3, 70)));
  CHECK(dp_decide(table, ctx_at(1, 0, 0)));
  CHECK_FALSE(dp_decide(table, ctx_at(4, 2, 50, false)));
  CHECK_THROWS_AS(dp_decide(table, ctx_at(11, 0, 0)), DomainError);
  CHECK_THROWS_AS(dp_decide(table, ctx_at(1, 1, 70)), DomainError);
}

TEST_CASE("DP special configurations") {
  SUBCASE("no crash risk: always fly while allowed") {
    MissionConfig cfg;
    cfg.crash_prob = 0.0;
    const auto t = solve_dp(cfg);
    for (int j = 1; j <= 10; ++j)
      for (int i = 0; i <= 8; ++i)
        for (Taler s : cfg.rho.values())
          if (t.contains(j, i, s)) CHECK(t.fly(j, i, s) == (s < 100 && i < 8));
  }
  SUBCASE("no later increases: fly exactly the first round") {
    MissionConfig cfg;
    cfg.increase_prob = 0.0;
    const auto t = solve_dp(cfg);
    for (int j = 1; j <= 10; ++j) {
      CHECK(t.fly(j, 0, 0));
      for (int i = 1; i <= 8; ++i) CHECK_FALSE(t.fly(j, i, 25));
    }
  }
  SUBCASE("argmax is invariant to scaling drone value and increments together") {
    const MissionConfig cfg;
    MissionConfig scaled = cfg;
    scaled.drone_value *= 3;
    scaled.rho = cfg.rho.scaled(3);
    const auto a = solve_dp(cfg), b = solve_dp(scaled);
    for (int j = 1; j <= 10; ++j)
      for (int i = 0; i <= 8; ++i)
        for (Taler s : cfg.rho.values())
          if (a.contains(j, i, s)) {
            CHECK(a.fly(j, i, s) == b.fly(j, i, 3 * s));
            CHECK(b.value(j, i, 3 * s) == doctest::Approx(3 * a.value(j, i, s)));
          }
  }
  SUBCASE("invalid configuration") {
    MissionConfig cfg;
    cfg.max_rounds = 0;
    CHECK_THROWS_AS(solve_dp(cfg), ConfigError);
  }
}

TEST_CASE("dominance and disagreement set") {
  const MissionConfig cfg;
  const auto table = std::make_shared<const DpTable>(solve_dp(cfg));
  const double dp = evaluate_policy_exact(DpPolicy(table), cfg).expected_value;
  const double closed = evaluate_policy_exact(ClosedLoopHeuristic(cfg), cfg).expected_value;
  const double open = evaluate_policy_exact(*make_open_heuristic(cfg), cfg).expected_value;
  CHECK(dp == doctest::Approx(table->expected_total()).epsilon(1e-12));
  CHECK(dp >= closed);
  CHECK(closed >= open);

  const auto dis = dp_vs_heuristic(*table);
  CHECK_FALSE(dis.empty());
  for (const auto& d : dis) CHECK(d.dp_fly != d.heuristic_fly);
  // the last junction carries no future besides the drone itself
  for (const auto& d : dis) CHECK(d.junction < 10);

  const auto text = export_dp_table(*table);
  CHECK(text.rfind("junction\trounds\tsigma", 0) == 0);
  CHECK(text == export_dp_table(solve_dp(cfg)));
}

TEST_CASE("simulation") {
  const MissionConfig cfg;
  SUBCASE("no crash risk never crashes") {
    MissionConfig safe = cfg;
    safe.crash_prob = 0.0;
    CHECK(simulate_missions(ClosedLoopHeuristic(safe), safe, 3, 5000).crash_rate == 0.0);
  }
  SUBCASE("always flying the maximum crashes with 1 - 0.98^80") {
    const auto s = simulate_missions(*make_always_fly_max(cfg), cfg, 11, 100'000);
    const double p = 1 - std::pow(0.98, 80);
    CHECK(std::abs(s.crash_rate - p) <= 3 * std::sqrt(p * (1 - p) / 1e5));
  }
  SUBCASE("deterministic and independent of thread count") {
    const ClosedLoopHeuristic pol(cfg);
    const auto a = simulate_missions(pol, cfg, 5, 20'000, 1);
    const auto b = simulate_missions(pol, cfg, 5, 20'000, 4);
    CHECK(a.mean_value == b.mean_value);
    CHECK(a.std_value == b.std_value);
    CHECK(a.junction_info_counts == b.junction_info_counts);
    CHECK(simulate_missions(pol, cfg, 6, 20'000).mean_value != a.mean_value);
  }
  SUBCASE("converges to the exact expectation") {
    const auto table = std::make_shared<const DpTable>(solve_dp(cfg));
    const DpPolicy dp(table);
    const ClosedLoopHeuristic closed(cfg);
    const auto open = make_open_heuristic(cfg);
    for (const Policy* p : std::vector<const Policy*>{&dp, &closed, open.get()}) {
      const auto s = simulate_missions(*p, cfg, 99, 100'000);
      const auto ex = evaluate_policy_exact(*p, cfg);
      CHECK(std::abs(s.mean_value - ex.expected_value) <= 3 * s.std_error);
      CHECK(s.crash_rate >= 0.0);
      CHECK(s.crash_rate <= 1.0);
      CHECK(s.mean_value <= 400 + 100 * 10);
    }
  }
}
