#include <sstream>

#include "doctest.h"
#include "uavstop/config.hpp"
#include "uavstop/errors.hpp"

using namespace uavstop;

namespace {

MissionConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty file gives the defaults") {
  CHECK(parse("") == MissionConfig{});
  CHECK(parse("# nothing\n\n   \n") == MissionConfig{});
}

TEST_CASE("every key is read") {
  const auto cfg = parse(
      "drone_value = 500\n"
      "increase_prob=0.25  # trailing comment\n"
      "crash_prob = 0.01\n"
      "num_junctions = 4\n"
      "max_rounds = 6\n"
      "rho_increments = 30, 20, 10\n"
      "taler_per_euro = 100\n"
      "mpl_payout_modulus = 10\n");
  CHECK(cfg.drone_value == 500);
  CHECK(cfg.increase_prob == 0.25);
  CHECK(cfg.crash_prob == 0.01);
  CHECK(cfg.num_junctions == 4);
  CHECK(cfg.max_rounds == 6);
  CHECK(cfg.rho.values() == std::vector<Taler>{0, 30, 50, 60});
  CHECK(cfg.taler_per_euro == 100);
  CHECK(cfg.mpl_payout_modulus == 10);
  CHECK(parse(format_config(cfg)) == cfg);
  CHECK(parse(format_config(MissionConfig{})) == MissionConfig{});
}

TEST_CASE("bad files are rejected with the line") {
  CHECK(error_of("drone_value = 400\nspeed = 3\n") == "config line 2: unknown key 'speed'");
  CHECK(error_of("max_rounds = 8\nmax_rounds = 7\n") == "config line 2: repeated key 'max_rounds'");
  CHECK(error_of("max_rounds 8\n") == "config line 1: expected key = value");
  CHECK(error_of("max_rounds = 8.5\n") == "config line 1: bad number '8.5'");
  CHECK(error_of("rho_increments = 5, 10\n").find("non-increasing") != std::string::npos);
  CHECK(error_of("crash_prob = 1\n") == "crash_prob must lie in [0, 1)");
  CHECK(error_of("num_junctions = 0\n") == "num_junctions must be >= 1");
}
