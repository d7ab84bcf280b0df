#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opbsp/block_model.hpp"
#include "opbsp/capacities.hpp"
#include "opbsp/dynamics.hpp"
#include "opbsp/index_strategies.hpp"
#include "opbsp/lp_io.hpp"
#include "opbsp/scheduler.hpp"

namespace opbsp {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitBudget = 3,
  kExitInfeasible = 4,
};

// Everything a run depends on. Defaults are overridden by a --config file,
// which is in turn overridden by command-line flags. The resolved value is
// echoed into manifest.json, and a manifest can be passed back as --config.
struct RunConfig {
  std::string model_path;  // empty: synthetic model from `dims` and `seed`
  Dims dims{8, 8, 6};
  SyntheticConfig synthetic;
  LoadConfig load;
  int slope_k = 1;
  Neighborhood neighborhood = Neighborhood::kFour;

  std::string strategy = "gittins";
  std::vector<std::string> indices{"greedy", "gittins", "cone"};
  bool constrained = true;
  StopRule stop = StopRule::kExhaust;
  ConeScore cone_score = ConeScore::kPerBlock;

  // "yearly": rho_year^floor(t / v) over extraction steps t; "per_block":
  // rho^t. Periods of a schedule are years either way.
  std::string discount_mode = "yearly";
  double rho_year = 1.0 / 1.1;
  int blocks_per_year = 1;
  std::optional<double> rho;        // per-block rate, defaults to rho_year
  std::optional<double> rho_sharp;  // Gittins index rate

  Capacities capacities;
  std::optional<int> horizon;
  std::uint64_t seed = 0;

  std::size_t dp_state_budget = 10'000'000;
  std::size_t lp_max_variables = 50'000;
  std::size_t lp_max_nonzeros = 200'000;

  std::string clean = "trailing";  // trailing, last_only, none
  bool resolve = false;
  LpFormat lp_format = LpFormat::kLp;
  bool solve_lp = false;

  std::string sequence_path;
  std::string schedule_path;

  void apply_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  // Discount over extraction steps used by strategies and the DP. A yearly
  // schedule with one block per year is plain per-block discounting.
  DiscountSchedule discount() const;
  // Rate of the Gittins index: rho_sharp, else the per-step rate.
  double gittins_rate() const;
  // Per-period rate of schedules and the LP.
  double period_rate() const;
};

BlockModel load_run_model(const RunConfig& config);

// Default horizon: enough periods to move every block under the tightest
// first-period upper capacity, or 1 without capacities.
int resolve_horizon(const RunConfig& config, const BlockModel& model);

std::unique_ptr<ColumnIndex> make_index(const std::string& name, const RunConfig& config,
                                        const BlockModel& model);

// Full command line; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opbsp
