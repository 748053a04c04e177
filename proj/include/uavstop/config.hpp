#pragma once
// Key-value configuration file shared by the CLI and the service.
//
//   # comment
//   drone_value        = 400
//   increase_prob      = 0.5
//   crash_prob         = 0.02
//   num_junctions      = 10
//   max_rounds         = 8
//   rho_increments     = 25,25,20,10,5,5,5,5
//   taler_per_euro     = 120
//   mpl_payout_modulus = 15
//
// Missing keys keep their defaults. Unknown keys, repeated keys and
// malformed values throw ConfigError naming the line.

#include <istream>
#include <string>

#include "uavstop/mission.hpp"

namespace uavstop {

MissionConfig parse_config(std::istream& is);
MissionConfig load_config(const std::string& path);
// Canonical form of `cfg`; parse_config reads it back unchanged.
std::string format_config(const MissionConfig& cfg);

}  // namespace uavstop
