#pragma once
// Twenty-row multiple price list: row k offers a safe k-1 euros (option A)
// against a lottery paying 30 euros or nothing with equal chance (option B).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "uavstop/mission.hpp"
#include "uavstop/rng.hpp"

namespace uavstop {

inline constexpr int kMplRows = 20;
inline constexpr Cents kLotteryPrize{3000};

enum class MplChoice { safe_a, lottery_b };

// Row 1..20 -> 0..19 euros.
Cents mpl_safe_amount(int row);

// Parses "A"/"B" per row. Throws ValidationError unless there are exactly 20.
std::vector<MplChoice> parse_mpl_choices(const std::vector<std::string>& letters);
std::vector<std::string> mpl_letters(const std::vector<MplChoice>& choices);

// B up to row switch_row - 1, A from switch_row on. switch_row = 21 is all B.
std::vector<MplChoice> monotone_mpl_sheet(int switch_row);

struct MplPayout {
  int row = 0;  // 1-based
  MplChoice choice = MplChoice::safe_a;
  std::optional<bool> lottery_won;  // only when B was chosen
  Cents amount;
};

// Draws the paid row uniformly and plays the lottery if B was chosen there.
MplPayout play_out_mpl(const std::vector<MplChoice>& choices, Rng& rng);
// Same with the row and the lottery draw fixed.
MplPayout play_out_mpl(const std::vector<MplChoice>& choices, int row, bool lottery_win);

}  // namespace uavstop
