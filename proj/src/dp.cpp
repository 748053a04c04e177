#include "uavstop/dp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "uavstop/errors.hpp"

namespace uavstop {
namespace {

constexpr double kNoFly = -std::numeric_limits<double>::infinity();

// Fly strictly better than stop, up to rounding noise.
bool prefers_fly(double fly, double stop) {
  return fly > stop + 1e-12 * std::max({1.0, std::abs(fly), std::abs(stop)});
}

bool attainable(const RhoLadder& rho, int rounds, Taler sigma) {
  const auto idx = rho.index_of(sigma);
  if (!idx) return false;
  if (rounds == 0) return *idx == 0;
  return *idx >= 1 && *idx <= static_cast<std::size_t>(rounds);
}

}  // namespace

std::size_t DpTable::offset(int junction, int rounds, Taler sigma) const {
  if (junction < 1 || junction > cfg_.num_junctions || rounds < 0 || rounds > cfg_.max_rounds)
    throw DomainError("state outside the DP table");
  const auto idx = cfg_.rho.index_of(sigma);
  if (!idx) throw DomainError("sigma " + std::to_string(sigma) + " is not on the ladder");
  const std::size_t ladder = cfg_.rho.size();
  const std::size_t per_junction = static_cast<std::size_t>(cfg_.max_rounds + 1) * ladder;
  return static_cast<std::size_t>(junction - 1) * per_junction + static_cast<std::size_t>(rounds) * ladder + *idx;
}

bool DpTable::contains(int junction, int rounds, Taler sigma) const {
  if (junction < 1 || junction > cfg_.num_junctions || rounds < 0 || rounds > cfg_.max_rounds) return false;
  if (!cfg_.rho.contains(sigma)) return false;
  return cells_[offset(junction, rounds, sigma)].reachable;
}

const DpTable::Cell& DpTable::cell(int junction, int rounds, Taler sigma) const {
  const auto& c = cells_[offset(junction, rounds, sigma)];
  if (!c.reachable)
    throw DomainError("state not attainable: sigma " + std::to_string(sigma) + " after " + std::to_string(rounds) +
                      " rounds");
  return c;
}

double DpTable::value(int junction, int rounds, Taler sigma) const { return cell(junction, rounds, sigma).value; }
double DpTable::stop_value(int junction, int rounds, Taler sigma) const { return cell(junction, rounds, sigma).stop; }
double DpTable::fly_value(int junction, int rounds, Taler sigma) const { return cell(junction, rounds, sigma).fly; }
bool DpTable::fly(int junction, int rounds, Taler sigma) const { return cell(junction, rounds, sigma).fly_action; }

namespace {

struct Backup {
  double stop;
  double fly;
};

// One Bellman backup given the value at the start of the next junction and
// the values of this junction's successor states.
template <typename ValueAt>
Backup backup(const MissionConfig& cfg, int rounds, Taler sigma, double next_junction_start, ValueAt&& value_after) {
  Backup b{static_cast<double>(sigma) + next_junction_start, kNoFly};
  if (rounds < cfg.max_rounds && sigma < cfg.rho.top()) {
    const double q = rounds == 0 ? 1.0 : cfg.increase_prob;
    const double r = cfg.crash_prob;
    const Taler up = next_value(sigma, cfg.rho);
    const auto branch = [&](Taler t) { return (1.0 - r) * value_after(t) + r * static_cast<double>(t); };
    b.fly = q * branch(up) + (q < 1.0 ? (1.0 - q) * branch(sigma) : 0.0);
  }
  return b;
}

}  // namespace

DpTable solve_dp(const MissionConfig& cfg) {
  cfg.validate();
  DpTable t;
  t.cfg_ = cfg;
  const std::size_t ladder = cfg.rho.size();
  t.cells_.assign(static_cast<std::size_t>(cfg.num_junctions) * static_cast<std::size_t>(cfg.max_rounds + 1) * ladder, {});

  double next_start = static_cast<double>(cfg.drone_value);
  for (int j = cfg.num_junctions; j >= 1; --j) {
    for (int i = cfg.max_rounds; i >= 0; --i) {
      for (Taler s : cfg.rho.values()) {
        if (!attainable(cfg.rho, i, s)) continue;
        auto& cell = t.cells_[t.offset(j, i, s)];
        const auto b = backup(cfg, i, s, next_start, [&](Taler u) { return t.cells_[t.offset(j, i + 1, u)].value; });
        cell.reachable = true;
        cell.stop = b.stop;
        cell.fly = b.fly;
        cell.fly_action = prefers_fly(b.fly, b.stop);
        cell.value = cell.fly_action ? b.fly : b.stop;
      }
    }
    next_start = t.cells_[t.offset(j, 0, 0)].value;
  }
  return t;
}

double bellman_residual(const DpTable& table) {
  const auto& cfg = table.config();
  double worst = 0.0;
  for (int j = 1; j <= cfg.num_junctions; ++j) {
    const double next_start = j == cfg.num_junctions ? static_cast<double>(cfg.drone_value) : table.value(j + 1, 0, 0);
    for (int i = 0; i <= cfg.max_rounds; ++i) {
      for (Taler s : cfg.rho.values()) {
        if (!table.contains(j, i, s)) continue;
        const auto b = backup(cfg, i, s, next_start, [&](Taler u) { return table.value(j, i + 1, u); });
        worst = std::max(worst, std::abs(table.value(j, i, s) - std::max(b.stop, b.fly)));
      }
    }
  }
  return worst;
}

bool dp_decide(const DpTable& table, const DecisionContext& ctx) {
  if (!ctx.intact) return false;
  if (!ctx.feedback_available || !ctx.sigma) throw DomainError("DP policy needs the observed picture value");
  return table.fly(ctx.junction, ctx.rounds_flown_here, *ctx.sigma);
}

std::vector<Disagreement> dp_vs_heuristic(const DpTable& table) {
  const auto& cfg = table.config();
  std::vector<Disagreement> out;
  for (int j = 1; j <= cfg.num_junctions; ++j)
    for (int i = 0; i <= cfg.max_rounds; ++i)
      for (Taler s : cfg.rho.values()) {
        if (!table.contains(j, i, s)) continue;
        DecisionContext ctx;
        ctx.junction = j;
        ctx.rounds_flown_here = i;
        ctx.sigma = s;
        const bool h = closed_loop_decide(ctx, cfg);
        const bool d = table.fly(j, i, s);
        if (h != d) out.push_back({j, i, s, d, h});
      }
  return out;
}

std::string export_dp_table(const DpTable& table) {
  const auto& cfg = table.config();
  std::string out = "junction\trounds\tsigma\tstop\tfly\tvalue\taction\theuristic\n";
  char line[256];
  for (int j = 1; j <= cfg.num_junctions; ++j)
    for (int i = 0; i <= cfg.max_rounds; ++i)
      for (Taler s : cfg.rho.values()) {
        if (!table.contains(j, i, s)) continue;
        DecisionContext ctx;
        ctx.junction = j;
        ctx.rounds_flown_here = i;
        ctx.sigma = s;
        const double fly = table.fly_value(j, i, s);
        char fly_text[32];
        if (std::isinf(fly))
          std::snprintf(fly_text, sizeof fly_text, "-");
        else
          std::snprintf(fly_text, sizeof fly_text, "%.6f", fly);
        std::snprintf(line, sizeof line, "%d\t%d\t%lld\t%.6f\t%s\t%.6f\t%s\t%s\n", j, i, static_cast<long long>(s),
                      table.stop_value(j, i, s), fly_text, table.value(j, i, s), table.fly(j, i, s) ? "fly" : "stop",
                      closed_loop_decide(ctx, cfg) ? "fly" : "stop");
        out += line;
      }
  return out;
}

}  // namespace uavstop
