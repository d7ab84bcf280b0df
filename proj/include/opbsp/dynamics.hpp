#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opbsp/block_model.hpp"

namespace opbsp {

// Mine state: x_c in {1, ..., D+1} is the depth of the top remaining block of
// column c; D+1 means the column is exhausted.
struct Profile {
  std::vector<int> depths;

  static Profile surface(const BlockModel& model) {
    return {std::vector<int>(model.num_columns(), 1)};
  }
  int operator[](int c) const { return depths[c]; }
  friend bool operator==(const Profile&, const Profile&) = default;
};

// A column to dig, or the retirement option (the fictitious column "infinity").
class Decision {
 public:
  static constexpr Decision retire() { return Decision(-1); }
  static constexpr Decision column(int c) { return Decision(c); }

  constexpr bool is_retire() const { return column_ < 0; }
  constexpr int column() const { return column_; }
  friend constexpr bool operator==(Decision, Decision) = default;

 private:
  constexpr explicit Decision(int c) : column_(c) {}
  int column_;
};

std::string to_string(Decision d);

// rho(t) = rho^t (per block) or rho_year^floor(t / v) (yearly, v blocks per
// year). Time t starts at 0.
class DiscountSchedule {
 public:
  static DiscountSchedule per_block(double rho);
  static DiscountSchedule yearly(double rho_year, int blocks_per_year);

  double factor(std::int64_t t) const;
  bool is_geometric() const { return blocks_per_year_ == 0; }
  double rate() const { return rate_; }
  int blocks_per_year() const { return blocks_per_year_; }

 private:
  DiscountSchedule(double rate, int blocks_per_year)
      : rate_(rate), blocks_per_year_(blocks_per_year) {}
  double rate_;
  int blocks_per_year_;  // 0 for per-block geometric discounting
};

bool is_admissible(const BlockModel& model, const Profile& x);

// True iff the column still has blocks and digging it keeps the profile
// admissible. Assumes `x` itself is admissible.
bool can_extract(const BlockModel& model, const Profile& x, int column);

// F(x, c). Throws InadmissibleDecision when `c` is not in U(x).
Profile transition(const BlockModel& model, const Profile& x, Decision c);

// U(x) in ascending column order, followed by Retire.
std::vector<Decision> admissible_decisions(const BlockModel& model,
                                           const Profile& x);

// Discounted value of a decision sequence started from the untouched mine.
// Throws InadmissibleDecision naming the first offending step.
double sequence_npv(const BlockModel& model, std::span<const Decision> seq,
                    const DiscountSchedule& disc);

// Profiles x(0), ..., x(n) visited by `seq`.
std::vector<Profile> replay(const BlockModel& model,
                            std::span<const Decision> seq);

struct DpOptions {
  std::optional<int> horizon;  // number of decision steps; default C * D
  std::size_t state_budget = 10'000'000;
};

struct DpResult {
  double value = 0.0;
  std::vector<Decision> sequence;  // trailing retirements are dropped
  std::size_t states = 0;
};

DpResult dp_solve(const BlockModel& model, const DiscountSchedule& disc,
                  const DpOptions& options = {});

// Exhaustive depth-first search over every admissible decision sequence of
// length `horizon` (retirement allowed at each step).
double brute_force_opt(const BlockModel& model, const DiscountSchedule& disc,
                       std::optional<int> horizon = std::nullopt,
                       std::size_t path_budget = 10'000'000);

// |S| for an nx * ny grid of columns of depth D under slope k. Throws
// BudgetExceeded when the row-state space is too large or the count overflows.
std::uint64_t state_space_count(Dims dims, int slope_k,
                                Neighborhood neighborhood);

}  // namespace opbsp
