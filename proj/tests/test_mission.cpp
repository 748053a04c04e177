#include <cmath>
#include <set>

#include "doctest.h"
#include "uavstop/errors.hpp"
#include "uavstop/mission.hpp"

using namespace uavstop;

TEST_CASE("ladder has the attainable values and a decreasing increment") {
  const auto rho = RhoLadder::standard();
  CHECK(rho.values() == std::vector<Taler>{0, 25, 50, 70, 80, 85, 90, 95, 100});
  CHECK(rho.increment(0) == 25);
  CHECK(rho.increment(25) == 25);
  CHECK(rho.increment(50) == 20);
  CHECK(rho.increment(70) == 10);
  for (Taler v : {80, 85, 90, 95}) CHECK(rho.increment(v) == 5);
  CHECK_THROWS_AS(rho.increment(100), DomainError);
  for (std::size_t k = 0; k + 1 < rho.size(); ++k) {
    CHECK(rho.values()[k] + rho.increment(rho.values()[k]) == rho.values()[k + 1]);
    if (k > 0) CHECK(rho.increments()[k] <= rho.increments()[k - 1]);
  }
  CHECK_THROWS_AS(RhoLadder({10, 20}), ConfigError);
  CHECK_THROWS_AS(RhoLadder({10, 0}), ConfigError);
}

TEST_CASE("default configuration") {
  const MissionConfig cfg;
  CHECK(cfg.drone_value == 400);
  CHECK(cfg.increase_prob == 0.5);
  CHECK(cfg.crash_prob == 0.02);
  CHECK(cfg.num_junctions == 10);
  CHECK(cfg.max_rounds == 8);
  CHECK(cfg.taler_per_euro == 120);
  CHECK(cfg.mpl_payout_modulus == 15);
  CHECK_NOTHROW(cfg.validate());

  auto bad = cfg;
  bad.crash_prob = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.increase_prob = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.num_junctions = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("next_value") {
  const auto rho = RhoLadder::standard();
  CHECK(next_value(25, rho) == 50);
  CHECK(next_value(95, rho) == 100);
  CHECK(next_value(0, rho) == 25);
  CHECK_THROWS_AS(next_value(100, rho), DomainError);
  CHECK_THROWS_AS(next_value(60, rho), DomainError);
}

TEST_CASE("fly_once examples") {
  const MissionConfig cfg;

  SUBCASE("first round increases even when the draw says no, then crashes") {
    const auto step = fly_once(MissionState{}, cfg, FlightDraw{false, true});
    CHECK(step.outcome.increased);
    CHECK(step.outcome.crashed);
    CHECK(step.outcome.sigma_after == 25);
    CHECK_FALSE(step.state.intact);
    CHECK(step.state.finished);
    CHECK(step.state.banked_info == 25);
  }

  SUBCASE("no increase leaves the value unchanged") {
    MissionState st;
    st.rounds_flown_here = 3;
    st.sigma = 70;
    const auto step = fly_once(st, cfg, FlightDraw{false, false});
    CHECK(step.outcome.sigma_after == 70);
    CHECK(step.outcome.round == 4);
    CHECK(step.state.rounds_flown_here == 4);
    CHECK(step.state.intact);
  }

  SUBCASE("protocol errors") {
    MissionState crashed;
    crashed.intact = false;
    crashed.finished = true;
    CHECK_THROWS_AS(fly_once(crashed, cfg, FlightDraw{}), ProtocolError);
    MissionState capped;
    capped.rounds_flown_here = 8;
    capped.sigma = 95;
    CHECK_THROWS_AS(fly_once(capped, cfg, FlightDraw{}), ProtocolError);
    MissionState done;
    done.finished = true;
    CHECK_THROWS_AS(fly_once(done, cfg, FlightDraw{}), ProtocolError);
    CHECK_THROWS_AS(end_junction(crashed, cfg), ProtocolError);
  }
}

TEST_CASE("flight Bernoulli rates match the configuration") {
  const MissionConfig cfg;
  Rng rng(20240611);
  const int n = 1'000'000;
  int inc = 0, crash = 0;
  MissionState st;
  st.rounds_flown_here = 1;
  st.sigma = 25;
  for (int k = 0; k < n; ++k) {
    const auto d = draw_flight(rng, cfg, 2);
    inc += d.increase;
    crash += d.crash;
  }
  const double sd_inc = std::sqrt(0.5 * 0.5 / n);
  const double sd_crash = std::sqrt(0.02 * 0.98 / n);
  CHECK(std::abs(inc / double(n) - 0.5) <= 3 * sd_inc);
  CHECK(std::abs(crash / double(n) - 0.02) <= 3 * sd_crash);
}

namespace {

MissionLog stop_at(Taler target, const std::vector<FlightDraw>& draws_per_junction, const MissionConfig& cfg) {
  Mission m(cfg);
  while (!m.finished()) {
    std::size_t k = 0;
    while (m.state().sigma < target && !m.finished()) m.fly(draws_per_junction.at(k++));
    if (!m.finished()) m.stop();
  }
  return m.log();
}

}  // namespace

TEST_CASE("mission_value examples") {
  const MissionConfig cfg;
  SUBCASE("intact, every junction stopped at 70") {
    const auto log = stop_at(70, {{true, false}, {true, false}, {true, false}}, cfg);
    CHECK(mission_value(log) == 1100);
    CHECK(log.total_value == 1100);
  }
  SUBCASE("crash on the very first round") {
    Mission m(cfg);
    m.fly(FlightDraw{true, true});
    CHECK(m.finished());
    CHECK(mission_value(m.log()) == 25);
  }
  SUBCASE("intact with every junction at the top") {
    const auto log = stop_at(100, std::vector<FlightDraw>(8, FlightDraw{true, false}), cfg);
    CHECK(mission_value(log) == 1400);
  }
  SUBCASE("unfinished mission") {
    Mission m(cfg);
    m.fly(FlightDraw{true, false});
    CHECK_THROWS_AS(mission_value(m.log()), StateError);
  }
  SUBCASE("skipping a junction banks nothing") {
    Mission m(cfg);
    m.stop();
    CHECK(m.log().junctions.front().info == 0);
    CHECK(m.log().junctions.front().flights.empty());
    CHECK(m.state().junction == 2);
  }
}

TEST_CASE("payoff_euro") {
  const MissionConfig cfg;
  CHECK(payoff_euro(1100, std::nullopt, 7, cfg) == Cents{917});
  CHECK(format_euro(payoff_euro(1100, std::nullopt, 7, cfg)) == "9.17");
  CHECK(payoff_euro(600, Cents{3000}, 30, cfg) == Cents{3500});
  CHECK(payoff_euro(600, Cents{3000}, 29, cfg) == Cents{500});
  CHECK(format_euro(payoff_euro(587, std::nullopt, 1, cfg)) == "4.89");
  // half-up: 3 Taler = 2.5 cents
  CHECK(payoff_euro(3, std::nullopt, 1, cfg) == Cents{3});
  CHECK_THROWS_AS(payoff_euro(-1, std::nullopt, 1, cfg), DomainError);
  CHECK_THROWS_AS(payoff_euro(10, Cents{-5}, 15, cfg), DomainError);
}

// Random fly/stop decisions exercise every path of the dynamics.
TEST_CASE("mission properties over random play") {
  const MissionConfig cfg;
  const std::set<Taler> attainable{25, 50, 70, 80, 85, 90, 95, 100};
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    auto play = [&](std::uint64_t s) {
      Rng dyn(s), choice(s + 1000);
      Mission m(cfg);
      std::vector<Taler> running;
      while (!m.finished()) {
        const auto& st = m.state();
        CHECK(running_value(st, cfg) == (st.intact ? 400 : 0) + st.banked_info + st.sigma);
        const bool can_fly = st.rounds_flown_here < cfg.max_rounds && st.sigma < cfg.rho.top();
        if (can_fly && choice.uniform() < 0.8) {
          const Taler before = st.sigma;
          const auto out = m.fly(dyn);
          CHECK(attainable.count(out.sigma_after) == 1);
          CHECK(out.sigma_after >= before);
        } else {
          m.stop();
        }
      }
      return m.log();
    };
    const auto log = play(seed);
    CHECK(log == play(seed));  // replay determinism
    CHECK(replay_consistent(log));
    CHECK(mission_value(log) == log.total_value);

    // accounting identity against the running value at the end
    MissionState end;
    Taler banked = 0;
    for (const auto& j : log.junctions) banked += j.info;
    end.banked_info = banked;
    end.intact = log.intact;
    CHECK(running_value(end, cfg) == log.total_value);

    if (!log.intact) {
      CHECK(log.junctions.back().end == JunctionEnd::crashed);
      // crash absorbs: nothing changes afterwards
      Mission m(cfg);
      m.fly(FlightDraw{true, true});
      const auto frozen = m.state();
      CHECK_THROWS_AS(m.fly(FlightDraw{true, false}), ProtocolError);
      CHECK_THROWS_AS(m.stop(), ProtocolError);
      CHECK(m.state() == frozen);
    }
  }
}

TEST_CASE("tampered logs fail replay") {
  const MissionConfig cfg;
  Mission m(cfg);
  m.fly(FlightDraw{true, false});
  m.fly(FlightDraw{true, false});
  m.stop();
  for (int j = 2; j <= 10; ++j) m.stop();
  auto log = m.log();
  CHECK(replay_consistent(log));
  log.junctions[0].flights[1].sigma_after = 70;
  CHECK_FALSE(replay_consistent(log));
}
