#include "opbsp/milp.hpp"

#include <cmath>
#include <functional>

#include "opbsp/error.hpp"

namespace opbsp {

std::size_t LpModel::num_nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.terms.size();
  return n;
}

double LpModel::objective_value(std::span<const double> x) const {
  double v = objective_offset;
  for (std::size_t j = 0; j < variables.size(); ++j) v += variables[j].objective * x[j];
  return v;
}

double LpModel::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables.size(); ++j) {
    worst = std::max(worst, variables[j].lower - x[j]);
    worst = std::max(worst, x[j] - variables[j].upper);
  }
  for (const auto& row : rows) {
    double activity = 0.0;
    for (const auto& t : row.terms) activity += t.coef * x[t.var];
    if (row.sense != RowSense::kGreaterEqual) worst = std::max(worst, activity - row.rhs);
    if (row.sense != RowSense::kLessEqual) worst = std::max(worst, row.rhs - activity);
  }
  return worst;
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kBudgetExceeded: return "budget_exceeded";
  }
  return "unknown";
}

OpbspInstance OpbspInstance::from_model(const BlockModel& model,
                                        const PrecedenceArcs& arcs, int horizon,
                                        double rho, const Capacities& capacities) {
  OpbspInstance inst;
  inst.block_ids.resize(model.num_blocks());
  for (int i = 0; i < model.num_blocks(); ++i) inst.block_ids[i] = i;
  inst.values.assign(model.values().begin(), model.values().end());
  inst.resource_names = model.resource_names();
  inst.resource_use.assign(model.resource_use().begin(), model.resource_use().end());
  inst.arcs = arcs.arcs;
  inst.horizon = horizon;
  inst.rho = rho;
  inst.capacities = capacities;
  return inst;
}

namespace {

std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_';
    if (!ok) ch = '_';
  }
  return out;
}

}  // namespace

LpModel build_opbsp_model(const OpbspInstance& inst) {
  const int n = inst.num_blocks();
  const int T = inst.horizon;
  if (T < 1) throw UsageError("OPBSP horizon must be >= 1");
  if (static_cast<int>(inst.block_ids.size()) != n) {
    throw ModelError("OPBSP instance has mismatched block ids");
  }
  for (const auto& [i, j] : inst.arcs) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw ModelError("precedence arc (" + std::to_string(i) + ", " +
                       std::to_string(j) + ") references an unknown block");
    }
  }
  const auto resource_cols = inst.capacities.resolve(inst.resource_names);

  LpModel m;
  m.num_blocks = n;
  m.horizon = T;
  m.rho = inst.rho;
  m.variables.reserve(static_cast<std::size_t>(n) * T);
  for (int i = 0; i < n; ++i) {
    for (int t = 1; t <= T; ++t) {
      const double disc = std::pow(inst.rho, t);
      const double weight = t < T ? disc - std::pow(inst.rho, t + 1) : disc;
      m.variables.push_back({"y_" + std::to_string(inst.block_ids[i]) + "_" +
                                 std::to_string(t),
                             0.0, 1.0, weight * inst.values[i], true});
    }
  }
  const auto y = [&](int i, int t) { return m.var_index(i, t); };
  const auto id = [&](int i) { return std::to_string(inst.block_ids[i]); };

  for (const auto& [i, j] : inst.arcs) {
    for (int t = 1; t <= T; ++t) {
      m.rows.push_back({"prec_" + id(i) + "_" + id(j) + "_" + std::to_string(t),
                        {{y(i, t), 1.0}, {y(j, t), -1.0}},
                        RowSense::kLessEqual,
                        0.0});
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int t = 2; t <= T; ++t) {
      m.rows.push_back({"mono_" + id(i) + "_" + std::to_string(t),
                        {{y(i, t - 1), 1.0}, {y(i, t), -1.0}},
                        RowSense::kLessEqual,
                        0.0});
    }
  }
  for (std::size_t l = 0; l < inst.capacities.limits.size(); ++l) {
    const auto& limit = inst.capacities.limits[l];
    const int r = resource_cols[l];
    const std::string rname = sanitize(limit.resource);
    for (int t = 1; t <= T; ++t) {
      std::vector<LpTerm> terms;
      for (int i = 0; i < n; ++i) {
        const double a = inst.use(i, r);
        if (a == 0.0) continue;
        if (t > 1) terms.push_back({y(i, t - 1), -a});
        terms.push_back({y(i, t), a});
      }
      const double hi = limit.upper_at(t);
      const double lo = limit.lower_at(t);
      if (std::isfinite(hi)) {
        m.rows.push_back({"cap_" + rname + "_" + std::to_string(t), terms,
                          RowSense::kLessEqual, hi});
      }
      if (std::isfinite(lo)) {
        m.rows.push_back({"capmin_" + rname + "_" + std::to_string(t), terms,
                          RowSense::kGreaterEqual, lo});
      }
    }
  }
  return m;
}

LpModel build_opbsp_model(const BlockModel& model, const PrecedenceArcs& arcs,
                          int horizon, double rho, const Capacities& capacities) {
  return build_opbsp_model(
      OpbspInstance::from_model(model, arcs, horizon, rho, capacities));
}

double integer_opt_small(const LpModel& model, int max_variables) {
  const int n = model.num_variables();
  if (n > max_variables) {
    throw BudgetExceeded("integer enumeration limited to " +
                         std::to_string(max_variables) + " variables, model has " +
                         std::to_string(n));
  }
  // Each row is checked once its highest-indexed variable is fixed.
  std::vector<std::vector<int>> rows_closing_at(n);
  std::vector<int> constant_rows;
  for (int r = 0; r < model.num_rows(); ++r) {
    int last = -1;
    for (const auto& t : model.rows[r].terms) last = std::max(last, t.var);
    if (last < 0) {
      constant_rows.push_back(r);
    } else {
      rows_closing_at[last].push_back(r);
    }
  }
  const auto row_ok = [&](int r, const std::vector<double>& x) {
    const auto& row = model.rows[r];
    double activity = 0.0;
    for (const auto& t : row.terms) activity += t.coef * x[t.var];
    constexpr double tol = 1e-9;
    if (row.sense != RowSense::kGreaterEqual && activity > row.rhs + tol) return false;
    if (row.sense != RowSense::kLessEqual && activity < row.rhs - tol) return false;
    return true;
  };
  std::vector<double> x(n, 0.0);
  for (int r : constant_rows) {
    if (!row_ok(r, x)) return model.maximize ? -kInf : kInf;
  }
  double best = model.maximize ? -kInf : kInf;
  std::function<void(int, double)> search = [&](int j, double acc) {
    if (j == n) {
      best = model.maximize ? std::max(best, acc) : std::min(best, acc);
      return;
    }
    for (int v = 0; v <= 1; ++v) {
      if (v < model.variables[j].lower || v > model.variables[j].upper) continue;
      x[j] = v;
      bool ok = true;
      for (int r : rows_closing_at[j]) {
        if (!row_ok(r, x)) {
          ok = false;
          break;
        }
      }
      if (ok) search(j + 1, acc + v * model.variables[j].objective);
    }
    x[j] = 0.0;
  };
  search(0, model.objective_offset);
  return best;
}

std::vector<double> expected_extraction_times(const LpModel& model,
                                              const LpSolution& solution) {
  if (model.num_blocks <= 0 || model.horizon <= 0) {
    throw UsageError("LP model carries no OPBSP block/period layout");
  }
  if (solution.values.size() != static_cast<std::size_t>(model.num_variables())) {
    throw UsageError("LP solution does not match the model");
  }
  const int T = model.horizon;
  std::vector<double> times(model.num_blocks);
  for (int i = 0; i < model.num_blocks; ++i) {
    double weighted = 0.0;
    double previous = 0.0;
    for (int t = 1; t <= T; ++t) {
      const double y = solution.values[model.var_index(i, t)];
      weighted += t * (y - previous);
      previous = y;
    }
    // sum_t x_it telescopes to y_iT.
    times[i] = weighted + (T + 1) * (1.0 - previous);
  }
  return times;
}

}  // namespace opbsp
