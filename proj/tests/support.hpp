#pragma once

// Generators and independent reference implementations shared by the tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "opbsp/block_model.hpp"
#include "opbsp/dynamics.hpp"
#include "opbsp/milp.hpp"

namespace testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Integer in [lo, hi].
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin(double p = 0.5) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// nx * ny columns of depth D, values uniform in [lo, hi] rounded to 1/4 so
// that ties show up, one "tonnage" resource with integer weights in [1, 3].
inline opbsp::BlockModel random_model(Rng& rng, opbsp::Dims dims, int slope_k = 1,
                                      opbsp::Neighborhood nb = opbsp::Neighborhood::kFour,
                                      double lo = -4.0, double hi = 4.0) {
  const int n = dims.nx * dims.ny * dims.depth;
  std::vector<double> values(n);
  std::vector<double> tonnage(n);
  for (int b = 0; b < n; ++b) {
    values[b] = std::round(rng.uniform(lo, hi) * 4.0) / 4.0;
    tonnage[b] = rng.integer(1, 3);
  }
  return opbsp::BlockModel(dims, std::move(values), {"tonnage"}, std::move(tonnage), slope_k,
                           nb);
}

// One row of columns; columns[c][d - 1] = w(d, c). Unit tonnage.
inline opbsp::BlockModel row_model(const std::vector<std::vector<double>>& columns,
                                   int slope_k = 1) {
  const int C = static_cast<int>(columns.size());
  const int D = static_cast<int>(columns.front().size());
  std::vector<double> values;
  for (const auto& col : columns) values.insert(values.end(), col.begin(), col.end());
  return opbsp::BlockModel({C, 1, D}, values, {"tonnage"},
                           std::vector<double>(values.size(), 1.0), slope_k);
}

// sup over tau of the discounted ratio, enumerating tau far into the zero
// tail instead of using the closed-form limit.
inline double gittins_oracle(const std::vector<double>& column, int top, double rho,
                             int tail = 20000) {
  double best = -std::numeric_limits<double>::infinity();
  double num = 0.0;
  double weight = 1.0;
  const int D = static_cast<int>(column.size());
  for (int tau = 0; top + tau <= D + tail; ++tau) {
    const int d = top + tau;
    if (d <= D) num += weight * column[d - 1];
    weight *= rho;
    // den = (1 - rho^(tau+1)) / (1 - rho)
    const double den = (1.0 - weight) / (1.0 - rho);
    best = std::max(best, num / den);
  }
  return best;
}

// Optimum of a bounded LP by enumerating every basic solution: each choice
// of n linearly independent tight constraints among rows and variable bounds.
// Returns nullopt when no feasible vertex exists.
inline std::optional<double> lp_vertex_oracle(const opbsp::LpModel& m) {
  const int n = m.num_variables();
  struct Tight {
    std::vector<double> a;
    double b;
  };
  std::vector<Tight> planes;
  for (const auto& row : m.rows) {
    std::vector<double> a(n, 0.0);
    for (const auto& t : row.terms) a[t.var] += t.coef;
    planes.push_back({a, row.rhs});
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> a(n, 0.0);
    a[j] = 1.0;
    planes.push_back({a, m.variables[j].lower});
    planes.push_back({a, m.variables[j].upper});
  }
  const int P = static_cast<int>(planes.size());
  std::optional<double> best;
  std::vector<int> pick;
  std::function<void(int)> choose = [&](int from) {
    if (static_cast<int>(pick.size()) == n) {
      Eigen::MatrixXd A(n, n);
      Eigen::VectorXd b(n);
      for (int r = 0; r < n; ++r) {
        for (int j = 0; j < n; ++j) A(r, j) = planes[pick[r]].a[j];
        b[r] = planes[pick[r]].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(b);
      std::vector<double> xs(x.data(), x.data() + n);
      if (m.max_violation(xs) > 1e-9) return;
      const double v = m.objective_value(xs);
      if (!best || (m.maximize ? v > *best : v < *best)) best = v;
      return;
    }
    for (int p = from; p <= P - (n - static_cast<int>(pick.size())); ++p) {
      pick.push_back(p);
      choose(p + 1);
      pick.pop_back();
    }
  };
  if (n == 0) {
    std::vector<double> none;
    if (m.max_violation(none) <= 1e-9) best = m.objective_offset;
    return best;
  }
  choose(0);
  return best;
}

// Admissible profiles of a grid, counted by enumerating all (D+1)^C vectors.
inline std::uint64_t count_profiles_brute(const opbsp::BlockModel& model) {
  const int C = model.num_columns();
  const int levels = model.depth() + 1;
  opbsp::Profile x{std::vector<int>(C, 1)};
  std::uint64_t count = 0;
  std::function<void(int)> rec = [&](int c) {
    if (c == C) {
      if (opbsp::is_admissible(model, x)) ++count;
      return;
    }
    for (int v = 1; v <= levels; ++v) {
      x.depths[c] = v;
      rec(c + 1);
    }
  };
  rec(0);
  return count;
}

// Predecessor cone of `block` by fixpoint iteration over the arc list.
inline std::set<int> cone_oracle(const opbsp::PrecedenceArcs& arcs, int block) {
  std::set<int> cone{block};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [succ, pred] : arcs.arcs) {
      if (cone.count(succ) && !cone.count(pred)) {
        cone.insert(pred);
        grew = true;
      }
    }
  }
  return cone;
}

// A uniformly random admissible decision sequence that ends when the mine is
// exhausted or, with probability `retire_p` per step, early.
inline std::vector<opbsp::Decision> random_walk(Rng& rng, const opbsp::BlockModel& model,
                                                double retire_p = 0.0) {
  std::vector<opbsp::Decision> seq;
  opbsp::Profile x = opbsp::Profile::surface(model);
  while (true) {
    auto options = opbsp::admissible_decisions(model, x);
    options.pop_back();  // retire
    if (options.empty() || rng.coin(retire_p)) break;
    const auto d = options[rng.integer(0, static_cast<int>(options.size()) - 1)];
    seq.push_back(d);
    x = opbsp::transition(model, x, d);
  }
  return seq;
}

inline std::vector<int> decision_blocks(const opbsp::BlockModel& model,
                                        const std::vector<opbsp::Decision>& seq) {
  std::vector<int> blocks;
  opbsp::Profile x = opbsp::Profile::surface(model);
  for (auto d : seq) {
    if (d.is_retire()) continue;
    blocks.push_back(model.block_index(x[d.column()], d.column()));
    x = opbsp::transition(model, x, d);
  }
  return blocks;
}

}  // namespace testing
