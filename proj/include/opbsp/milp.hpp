#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "opbsp/block_model.hpp"
#include "opbsp/capacities.hpp"

namespace opbsp {

enum class RowSense { kLessEqual, kGreaterEqual, kEqual };

struct LpTerm {
  int var = 0;
  double coef = 0.0;
};

struct LpRow {
  std::string name;
  std::vector<LpTerm> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

struct LpVariable {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  double objective = 0.0;
  bool integer = false;
};

// A linear (or binary, when variables are marked integer) program. Models
// built from an OPBSP instance also record the (block, period) layout of the
// y variables; models read back from files carry only names.
struct LpModel {
  std::string name = "opbsp";
  bool maximize = true;
  std::vector<LpVariable> variables;
  std::vector<LpRow> rows;
  double objective_offset = 0.0;

  int num_blocks = 0;
  int horizon = 0;
  double rho = 0.0;

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  std::size_t num_nonzeros() const;
  // y_{it}, t in [1, T].
  int var_index(int block, int t) const { return block * horizon + (t - 1); }

  double objective_value(std::span<const double> x) const;
  // Largest violation of any row or bound by `x`.
  double max_violation(std::span<const double> x) const;
};

// OPBSP(B, A, v, a, T, rho, C+, C-) over a local block numbering 0..N-1.
// `block_ids` only feeds variable names so that sub-instances keep the ids
// of the originating block model.
struct OpbspInstance {
  std::vector<int> block_ids;
  std::vector<double> values;
  std::vector<std::string> resource_names;
  std::vector<double> resource_use;  // block-major
  std::vector<std::pair<int, int>> arcs;
  int horizon = 1;
  double rho = 1.0;
  Capacities capacities;

  int num_blocks() const { return static_cast<int>(values.size()); }
  int num_resources() const { return static_cast<int>(resource_names.size()); }
  double use(int block, int r) const {
    return resource_use[static_cast<std::size_t>(block) * num_resources() + r];
  }

  static OpbspInstance from_model(const BlockModel& model,
                                  const PrecedenceArcs& arcs, int horizon,
                                  double rho, const Capacities& capacities);
};

// Variables y_{it} in [0, 1] marked integer; objective
//   sum_t rho^t sum_i v_i (y_it - y_i,t-1)
// written by telescoping as sum_{t<T} (rho^t - rho^{t+1}) v_i y_it
// + rho^T v_i y_iT. Rows: precedence y_it <= y_jt, monotonicity
// y_i,t-1 <= y_it, and per-period resource bounds on y_it - y_i,t-1.
LpModel build_opbsp_model(const OpbspInstance& instance);
LpModel build_opbsp_model(const BlockModel& model, const PrecedenceArcs& arcs,
                          int horizon, double rho, const Capacities& capacities);

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kBudgetExceeded };

std::string to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kBudgetExceeded;
  double objective = 0.0;
  std::vector<double> values;
  std::size_t iterations = 0;
  std::string message;
};

struct SimplexOptions {
  std::size_t max_variables = 50'000;
  std::size_t max_nonzeros = 200'000;
  std::size_t iteration_limit = 2'000'000;
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  int refactor_interval = 64;
};

// Bounded primal simplex (two phases, Bland's rule) on the continuous
// relaxation; integrality marks are ignored.
LpSolution solve_lp_relaxation(const LpModel& model,
                               const SimplexOptions& options = {});

// Best objective over 0/1 assignments of all variables that satisfy every
// row. Refuses models with more than `max_variables` variables.
double integer_opt_small(const LpModel& model, int max_variables = 24);

// E_i = sum_t t x_it + (T + 1) (1 - sum_t x_it) for every block of an OPBSP
// model, with x_it = y_it - y_i,t-1 read from `solution`.
std::vector<double> expected_extraction_times(const LpModel& model,
                                              const LpSolution& solution);

}  // namespace opbsp
