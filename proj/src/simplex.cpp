// Bounded-variable revised primal simplex.
//
// Every row r gets a logical variable z_r = a_r . y whose bounds encode the
// row sense, so the constraint system is [A | -I] (y, z) = 0 with only box
// constraints on the variables. The initial basis is the logical one.
// Phase 1 minimises the sum of bound infeasibilities of the basic variables;
// phase 2 optimises the true objective. Entering and leaving variables follow
// Bland's smallest-index rule. The basis is kept as a sparse LU factorization
// plus a product-form eta file, refactored every `refactor_interval` pivots.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>

#include "opbsp/milp.hpp"

namespace opbsp {

namespace {

enum class VarState { kBasic, kAtLower, kAtUpper, kFree };

class RevisedSimplex {
 public:
  RevisedSimplex(const LpModel& model, const SimplexOptions& options)
      : model_(model), opt_(options) {
    n_ = model.num_variables();
    m_ = model.num_rows();
    total_ = n_ + m_;
    lower_.resize(total_);
    upper_.resize(total_);
    cost_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) {
      const auto& v = model.variables[j];
      lower_[j] = v.lower;
      upper_[j] = v.upper;
      cost_[j] = model.maximize ? -v.objective : v.objective;
    }
    for (int r = 0; r < m_; ++r) {
      const auto& row = model.rows[r];
      lower_[n_ + r] = row.sense == RowSense::kLessEqual ? -kInf : row.rhs;
      upper_[n_ + r] = row.sense == RowSense::kGreaterEqual ? kInf : row.rhs;
    }
    // Column-wise copy of A, summing duplicate entries.
    std::vector<std::vector<std::pair<int, double>>> cols(n_);
    for (int r = 0; r < m_; ++r) {
      for (const auto& t : model.rows[r].terms) cols[t.var].emplace_back(r, t.coef);
    }
    col_start_.push_back(0);
    for (int j = 0; j < n_; ++j) {
      std::sort(cols[j].begin(), cols[j].end());
      for (std::size_t k = 0; k < cols[j].size(); ++k) {
        if (k > 0 && cols[j][k].first == cols[j][k - 1].first) {
          col_val_.back() += cols[j][k].second;
        } else {
          col_row_.push_back(cols[j][k].first);
          col_val_.push_back(cols[j][k].second);
        }
      }
      col_start_.push_back(static_cast<int>(col_row_.size()));
    }
  }

  LpSolution run() {
    LpSolution sol;
    for (int j = 0; j < n_; ++j) {
      if (lower_[j] > upper_[j]) {
        sol.status = LpStatus::kInfeasible;
        sol.message = "variable " + model_.variables[j].name + " has empty bounds";
        return sol;
      }
    }
    initialise();
    if (!refactor()) return numerical_failure();

    std::vector<double> cb(m_);
    std::vector<double> alpha(m_);
    std::size_t iter = 0;
    for (;; ++iter) {
      if (iter >= opt_.iteration_limit) {
        sol.status = LpStatus::kBudgetExceeded;
        sol.iterations = iter;
        sol.message = "iteration limit reached";
        return sol;
      }
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval && !refactor()) {
        return numerical_failure();
      }
      bool phase1 = false;
      for (int p = 0; p < m_; ++p) {
        const int v = basis_[p];
        const double x = x_[v];
        double c = 0.0;
        if (x < lower_[v] - opt_.feasibility_tol) {
          c = -1.0;
        } else if (x > upper_[v] + opt_.feasibility_tol) {
          c = 1.0;
        }
        cb[p] = c;
        phase1 = phase1 || c != 0.0;
      }
      if (!phase1) {
        for (int p = 0; p < m_; ++p) cb[p] = cost_[basis_[p]];
      }
      const std::vector<double> pi = btran(cb);

      int entering = -1;
      int dir = 0;
      for (int j = 0; j < total_ && entering < 0; ++j) {
        const VarState s = state_[j];
        if (s == VarState::kBasic || lower_[j] == upper_[j]) continue;
        const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(pi, j);
        if ((s == VarState::kAtLower || s == VarState::kFree) &&
            d < -opt_.optimality_tol) {
          entering = j;
          dir = 1;
        } else if ((s == VarState::kAtUpper || s == VarState::kFree) &&
                   d > opt_.optimality_tol) {
          entering = j;
          dir = -1;
        }
      }
      if (entering < 0) {
        if (phase1) {
          sol.status = LpStatus::kInfeasible;
          sol.iterations = iter;
          sol.message = "no feasible point";
          return sol;
        }
        break;
      }

      ftran_column(entering, alpha);
      // Ratio test. Basic variable at position p moves at rate -dir * alpha[p].
      double theta = upper_[entering] - lower_[entering];
      int leave_pos = -1;
      double leave_value = 0.0;
      VarState leave_state = VarState::kAtLower;
      constexpr double kPivotTol = 1e-9;
      constexpr double kTieTol = 1e-12;
      for (int p = 0; p < m_; ++p) {
        const double rate = -dir * alpha[p];
        if (std::abs(rate) <= kPivotTol) continue;
        const int v = basis_[p];
        const double x = x_[v];
        double limit = kInf;
        double target = 0.0;
        VarState target_state = VarState::kAtLower;
        const bool below = x < lower_[v] - opt_.feasibility_tol;
        const bool above = x > upper_[v] + opt_.feasibility_tol;
        if (rate > 0.0) {
          if (below) {
            target = lower_[v];
          } else if (!above && std::isfinite(upper_[v])) {
            target = upper_[v];
            target_state = VarState::kAtUpper;
          } else {
            continue;
          }
          limit = std::max(0.0, (target - x) / rate);
        } else {
          if (above) {
            target = upper_[v];
            target_state = VarState::kAtUpper;
          } else if (!below && std::isfinite(lower_[v])) {
            target = lower_[v];
          } else {
            continue;
          }
          limit = std::max(0.0, (x - target) / -rate);
        }
        const bool better = limit < theta - kTieTol;
        const bool tie = !better && limit <= theta + kTieTol;
        if (better || (tie && (leave_pos < 0 ? v < entering : v < basis_[leave_pos]))) {
          theta = std::min(theta, limit);
          if (better) theta = limit;
          leave_pos = p;
          leave_value = target;
          leave_state = target_state;
        }
      }
      if (!std::isfinite(theta)) {
        sol.status = phase1 ? LpStatus::kInfeasible : LpStatus::kUnbounded;
        sol.iterations = iter;
        sol.message = phase1 ? "phase 1 ray" : "objective is unbounded";
        return sol;
      }

      x_[entering] += dir * theta;
      for (int p = 0; p < m_; ++p) x_[basis_[p]] -= dir * theta * alpha[p];
      if (leave_pos < 0) {
        // Bound flip of the entering variable; the basis is unchanged.
        if (dir > 0) {
          x_[entering] = upper_[entering];
          state_[entering] = VarState::kAtUpper;
        } else {
          x_[entering] = lower_[entering];
          state_[entering] = VarState::kAtLower;
        }
        continue;
      }
      const int leaving = basis_[leave_pos];
      x_[leaving] = leave_value;
      state_[leaving] = leave_state;
      basis_[leave_pos] = entering;
      state_[entering] = VarState::kBasic;
      push_eta(leave_pos, alpha);
    }

    sol.status = LpStatus::kOptimal;
    sol.iterations = iter;
    sol.values.assign(x_.begin(), x_.begin() + n_);
    sol.objective = model_.objective_value(sol.values);
    const double violation = model_.max_violation(sol.values);
    if (violation > opt_.feasibility_tol) {
      sol.message = "final violation " + std::to_string(violation);
    }
    return sol;
  }

 private:
  struct Eta {
    int pos;
    double pivot;
    std::vector<std::pair<int, double>> others;  // alpha without the pivot
  };

  void initialise() {
    x_.assign(total_, 0.0);
    state_.assign(total_, VarState::kBasic);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j])) {
        state_[j] = VarState::kAtLower;
        x_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        state_[j] = VarState::kAtUpper;
        x_[j] = upper_[j];
      } else {
        state_[j] = VarState::kFree;
      }
    }
    basis_.resize(m_);
    for (int r = 0; r < m_; ++r) basis_[r] = n_ + r;
  }

  LpSolution numerical_failure() const {
    LpSolution sol;
    sol.status = LpStatus::kBudgetExceeded;
    sol.message = "basis factorization failed";
    return sol;
  }

  double dot_column(const std::vector<double>& y, int j) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += y[col_row_[k]] * col_val_[k];
    return s;
  }

  bool refactor() {
    etas_.clear();
    if (m_ == 0) return true;
    std::vector<Eigen::Triplet<double>> trips;
    for (int p = 0; p < m_; ++p) {
      const int v = basis_[p];
      if (v >= n_) {
        trips.emplace_back(v - n_, p, -1.0);
      } else {
        for (int k = col_start_[v]; k < col_start_[v + 1]; ++k) {
          trips.emplace_back(col_row_[k], p, col_val_[k]);
        }
      }
    }
    Eigen::SparseMatrix<double> basis(m_, m_);
    basis.setFromTriplets(trips.begin(), trips.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    if (lu_.info() != Eigen::Success) return false;

    // x_B = B^-1 (-N x_N)
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] += x_[j];
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
          rhs[col_row_[k]] -= col_val_[k] * x_[j];
        }
      }
    }
    const Eigen::VectorXd xb = lu_.solve(rhs);
    for (int p = 0; p < m_; ++p) x_[basis_[p]] = xb[p];
    return true;
  }

  void ftran_column(int j, std::vector<double>& out) {
    if (m_ == 0) return;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
    if (j >= n_) {
      a[j - n_] = -1.0;
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) a[col_row_[k]] = col_val_[k];
    }
    Eigen::VectorXd x = lu_.solve(a);
    for (const auto& eta : etas_) {
      const double xp = x[eta.pos] / eta.pivot;
      x[eta.pos] = xp;
      if (xp == 0.0) continue;
      for (const auto& [i, a_i] : eta.others) x[i] -= a_i * xp;
    }
    for (int p = 0; p < m_; ++p) out[p] = x[p];
  }

  std::vector<double> btran(const std::vector<double>& cb) {
    if (m_ == 0) return {};
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(cb.data(), m_);
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = y[it->pos];
      for (const auto& [i, a_i] : it->others) s -= a_i * y[i];
      y[it->pos] = s / it->pivot;
    }
    const Eigen::VectorXd pi = lu_.transpose().solve(y);
    return std::vector<double>(pi.data(), pi.data() + m_);
  }

  void push_eta(int pos, const std::vector<double>& alpha) {
    Eta eta{pos, alpha[pos], {}};
    for (int p = 0; p < m_; ++p) {
      if (p != pos && alpha[p] != 0.0) eta.others.emplace_back(p, alpha[p]);
    }
    etas_.push_back(std::move(eta));
  }

  const LpModel& model_;
  SimplexOptions opt_;
  int n_ = 0, m_ = 0, total_ = 0;
  std::vector<double> lower_, upper_, cost_;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

}  // namespace

LpSolution solve_lp_relaxation(const LpModel& model, const SimplexOptions& options) {
  if (static_cast<std::size_t>(model.num_variables()) > options.max_variables ||
      model.num_nonzeros() > options.max_nonzeros) {
    LpSolution sol;
    sol.status = LpStatus::kBudgetExceeded;
    sol.message = "model has " + std::to_string(model.num_variables()) +
                  " variables and " + std::to_string(model.num_nonzeros()) +
                  " nonzeros, above the bundled solver budget (" +
                  std::to_string(options.max_variables) + " variables, " +
                  std::to_string(options.max_nonzeros) +
                  " nonzeros); export it with `opbsp lp-export` and use an "
                  "external solver";
    return sol;
  }
  RevisedSimplex simplex(model, options);
  return simplex.run();
}

}  // namespace opbsp
