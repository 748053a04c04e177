#include "uavstop/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "uavstop/errors.hpp"

namespace uavstop {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T number(const std::string& v, const std::string& where) {
  T x{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size()) throw ConfigError(where + ": bad number '" + v + "'");
  return x;
}

}  // namespace

MissionConfig parse_config(std::istream& is) {
  MissionConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + ": repeated key '" + key + "'");
    if (key == "drone_value") cfg.drone_value = number<Taler>(value, where);
    else if (key == "increase_prob") cfg.increase_prob = number<double>(value, where);
    else if (key == "crash_prob") cfg.crash_prob = number<double>(value, where);
    else if (key == "num_junctions") cfg.num_junctions = number<int>(value, where);
    else if (key == "max_rounds") cfg.max_rounds = number<int>(value, where);
    else if (key == "taler_per_euro") cfg.taler_per_euro = number<std::int64_t>(value, where);
    else if (key == "mpl_payout_modulus") cfg.mpl_payout_modulus = number<std::int64_t>(value, where);
    else if (key == "rho_increments") {
      std::vector<Taler> inc;
      std::istringstream parts(value);
      std::string item;
      while (std::getline(parts, item, ',')) inc.push_back(number<Taler>(trim(item), where));
      try {
        cfg.rho = RhoLadder(inc);
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
      }
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

MissionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string format_config(const MissionConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "drone_value = " << cfg.drone_value << "\n"
     << "increase_prob = " << cfg.increase_prob << "\n"
     << "crash_prob = " << cfg.crash_prob << "\n"
     << "num_junctions = " << cfg.num_junctions << "\n"
     << "max_rounds = " << cfg.max_rounds << "\n"
     << "rho_increments = ";
  const auto& inc = cfg.rho.increments();
  for (std::size_t k = 0; k < inc.size(); ++k) os << (k ? "," : "") << inc[k];
  os << "\ntaler_per_euro = " << cfg.taler_per_euro << "\n"
     << "mpl_payout_modulus = " << cfg.mpl_payout_modulus << "\n";
  return os.str();
}

}  // namespace uavstop
