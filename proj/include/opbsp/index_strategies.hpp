#pragma once

#include <memory>
#include <string>
#include <vector>

#include "opbsp/block_model.hpp"
#include "opbsp/dynamics.hpp"
#include "opbsp/milp.hpp"

namespace opbsp {

// Value of the top block, or -inf for an exhausted column.
double greedy_index(const BlockModel& model, int column, int top_depth);

// sup over tau >= 0 of sum_{s<=tau} rho^s w(x+s, c) / sum_{s<=tau} rho^s with
// w = 0 below the mine. The tail tau -> infinity is compared in closed form.
// Returns 0 for an exhausted column.
double gittins_index(const BlockModel& model, int column, int top_depth,
                     double rho);

enum class ConeScore { kPerBlock, kRawSum };

// Best value over truncation depths d in [x_c, D] of the not yet extracted
// part of the predecessor cone of block (d, c): mean value per block, or the
// plain sum. -inf for an exhausted column. The cone is the closure of `arcs`.
double cone_index(const BlockModel& model, const PrecedenceArcs& arcs,
                  const Profile& profile, int column,
                  ConeScore score = ConeScore::kPerBlock);

// -E_i for the top block i of the column, with E_i the expected extraction
// time under an LP relaxation solution of the OPBSP model of `model`.
double toposort_index(const BlockModel& model, const LpModel& lp,
                      const LpSolution& solution, int column, int top_depth);

// A column index evaluated by the strategy executor. `profile` is the
// current state; only `column` of it is guaranteed to have changed since the
// previous call for that column.
class ColumnIndex {
 public:
  virtual ~ColumnIndex() = default;
  virtual std::string name() const = 0;
  virtual double operator()(const BlockModel& model, const Profile& profile,
                            int column) = 0;
};

std::unique_ptr<ColumnIndex> make_greedy_index();
std::unique_ptr<ColumnIndex> make_gittins_index(double rho);
// Uses the geometry of the slope rule directly rather than walking arcs.
std::unique_ptr<ColumnIndex> make_cone_index(ConeScore score = ConeScore::kPerBlock);
// Expected extraction times are computed once from the LP solution.
std::unique_ptr<ColumnIndex> make_toposort_index(const BlockModel& model,
                                                 const LpModel& lp,
                                                 const LpSolution& solution);

enum class StopRule { kExhaust, kNonPositive };

struct StrategyOptions {
  bool constrained = true;
  StopRule stop = StopRule::kExhaust;
};

struct StrategyStep {
  int column = 0;
  int depth = 0;  // depth of the extracted block
  double index = 0.0;
};

struct StrategyRun {
  std::vector<Decision> sequence;
  std::vector<StrategyStep> steps;
  double npv = 0.0;

  // Flat block indices in extraction order.
  std::vector<int> blocks(const BlockModel& model) const;
};

// Repeatedly digs the candidate column of highest index (lowest column id on
// ties). In constrained mode only columns whose top block keeps the slope
// rule are candidates. Stops when no candidate is left or, under
// kNonPositive, when the best index is <= 0.
StrategyRun run_index_strategy(const BlockModel& model, ColumnIndex& index,
                               const DiscountSchedule& disc,
                               const StrategyOptions& options = {});

// NPV of the unconstrained Gittins strategy under rho^t with value-aware
// stopping. Bounds the optimum of every schedule with rho(t) <= rho^t.
double gittins_upper_bound(const BlockModel& model, double rho);

// (1 / rho_year) * gittins_upper_bound(model, rho_year^(1/v)), a bound under
// the yearly schedule rho_year^floor(t/v).
double yearly_bound_adapter(const BlockModel& model, double rho_year,
                            int blocks_per_year);

// The bound matching `disc`: the Gittins bound at rate rho for per-block
// discounting, the yearly adapter otherwise.
double index_upper_bound(const BlockModel& model, const DiscountSchedule& disc);

}  // namespace opbsp
