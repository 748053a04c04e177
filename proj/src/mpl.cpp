#include "uavstop/mpl.hpp"

#include "uavstop/errors.hpp"

namespace uavstop {

Cents mpl_safe_amount(int row) {
  if (row < 1 || row > kMplRows) throw DomainError("price-list row out of range");
  return {static_cast<std::int64_t>(row - 1) * 100};
}

std::vector<MplChoice> parse_mpl_choices(const std::vector<std::string>& letters) {
  if (letters.size() != kMplRows)
    throw ValidationError("price list needs " + std::to_string(kMplRows) + " choices, got " +
                          std::to_string(letters.size()));
  std::vector<MplChoice> out;
  out.reserve(kMplRows);
  for (const auto& l : letters) {
    if (l == "A")
      out.push_back(MplChoice::safe_a);
    else if (l == "B")
      out.push_back(MplChoice::lottery_b);
    else
      throw ValidationError("price-list choices must be \"A\" or \"B\"");
  }
  return out;
}

std::vector<std::string> mpl_letters(const std::vector<MplChoice>& choices) {
  std::vector<std::string> out;
  out.reserve(choices.size());
  for (auto c : choices) out.emplace_back(c == MplChoice::safe_a ? "A" : "B");
  return out;
}

std::vector<MplChoice> monotone_mpl_sheet(int switch_row) {
  if (switch_row < 1 || switch_row > kMplRows + 1) throw DomainError("switch row out of range");
  std::vector<MplChoice> out(kMplRows, MplChoice::safe_a);
  for (int r = 1; r < switch_row; ++r) out[static_cast<std::size_t>(r - 1)] = MplChoice::lottery_b;
  return out;
}

MplPayout play_out_mpl(const std::vector<MplChoice>& choices, int row, bool lottery_win) {
  if (choices.size() != kMplRows) throw ValidationError("price list must have 20 choices");
  MplPayout p;
  p.row = row;
  p.choice = choices.at(static_cast<std::size_t>(row - 1));
  if (p.choice == MplChoice::safe_a) {
    p.amount = mpl_safe_amount(row);
  } else {
    p.lottery_won = lottery_win;
    p.amount = lottery_win ? kLotteryPrize : Cents{0};
  }
  return p;
}

MplPayout play_out_mpl(const std::vector<MplChoice>& choices, Rng& rng) {
  const int row = static_cast<int>(rng.uniform_int(1, kMplRows));
  const bool win = rng.bernoulli(0.5);
  return play_out_mpl(choices, row, win);
}

}  // namespace uavstop
