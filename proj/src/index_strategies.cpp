#include "opbsp/index_strategies.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "opbsp/error.hpp"

namespace opbsp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_rate(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw UsageError("discount rate must lie in (0, 1), got " + std::to_string(rho));
  }
}

}  // namespace

double greedy_index(const BlockModel& model, int column, int top_depth) {
  if (top_depth > model.depth()) return kNegInf;
  return model.value(top_depth, column);
}

double gittins_index(const BlockModel& model, int column, int top_depth, double rho) {
  check_rate(rho);
  const int D = model.depth();
  if (top_depth > D) return 0.0;
  double num = 0.0;
  double den = 0.0;
  double weight = 1.0;
  double best = kNegInf;
  for (int d = top_depth; d <= D; ++d) {
    num += weight * model.value(d, column);
    den += weight;
    best = std::max(best, num / den);
    weight *= rho;
  }
  // Past the bottom the ratio moves monotonically towards num * (1 - rho).
  return std::max(best, num * (1.0 - rho));
}

double cone_index(const BlockModel& model, const PrecedenceArcs& arcs,
                  const Profile& profile, int column, ConeScore score) {
  const int D = model.depth();
  const int top = profile[column];
  if (top > D) return kNegInf;
  const auto preds = arcs.predecessors();
  double best = kNegInf;
  std::vector<char> seen(model.num_blocks());
  for (int d = top; d <= D; ++d) {
    std::fill(seen.begin(), seen.end(), 0);
    std::deque<int> queue{model.block_index(d, column)};
    seen[queue.front()] = 1;
    double sum = 0.0;
    int count = 0;
    while (!queue.empty()) {
      const int b = queue.front();
      queue.pop_front();
      const BlockCoord bc = model.coord(b);
      if (bc.depth >= profile[bc.column]) {
        sum += model.block_value(b);
        ++count;
      }
      for (int p : preds[b]) {
        if (!seen[p]) {
          seen[p] = 1;
          queue.push_back(p);
        }
      }
    }
    best = std::max(best, score == ConeScore::kPerBlock ? sum / count : sum);
  }
  return best;
}

double toposort_index(const BlockModel& model, const LpModel& lp,
                      const LpSolution& solution, int column, int top_depth) {
  if (top_depth > model.depth()) return kNegInf;
  const int block = model.block_index(top_depth, column);
  if (block >= lp.num_blocks) {
    throw ModelError("block " + std::to_string(block) + " is not part of the LP model");
  }
  return -expected_extraction_times(lp, solution)[block];
}

namespace {

class GreedyIndex : public ColumnIndex {
 public:
  std::string name() const override { return "greedy"; }
  double operator()(const BlockModel& model, const Profile& x, int c) override {
    return greedy_index(model, c, x[c]);
  }
};

class GittinsIndex : public ColumnIndex {
 public:
  explicit GittinsIndex(double rho) : rho_(rho) { check_rate(rho); }
  std::string name() const override { return "gittins"; }
  double operator()(const BlockModel& model, const Profile& x, int c) override {
    if (x[c] > model.depth()) return kNegInf;
    return gittins_index(model, c, x[c], rho_);
  }

 private:
  double rho_;
};

// A block (d', c') lies in the cone of (d, c) iff d' <= d - k * dist(c, c'),
// dist being the hop distance on the column adjacency graph.
class ConeIndex : public ColumnIndex {
 public:
  explicit ConeIndex(ConeScore score) : score_(score) {}
  std::string name() const override { return "cone"; }

  double operator()(const BlockModel& model, const Profile& x, int c) override {
    const int D = model.depth();
    const int k = model.slope_k();
    if (x[c] > D) return kNegInf;
    prepare(model);
    std::fill(sum_.begin(), sum_.end(), 0.0);
    std::fill(count_.begin(), count_.end(), 0);
    const int radius = (D - 1) / k;
    ++stamp_;
    frontier_.assign(1, c);
    mark_[c] = stamp_;
    for (int g = 0; g <= radius && !frontier_.empty(); ++g) {
      for (int cc : frontier_) {
        const int from = x[cc];
        const double base = prefix_[cc * (D + 1) + from - 1];
        for (int d = std::max(x[c], from + k * g); d <= D; ++d) {
          const int bottom = d - k * g;
          sum_[d] += prefix_[cc * (D + 1) + bottom] - base;
          count_[d] += bottom - from + 1;
        }
      }
      next_.clear();
      for (int cc : frontier_) {
        for (int nb : model.neighbors(cc)) {
          if (mark_[nb] != stamp_) {
            mark_[nb] = stamp_;
            next_.push_back(nb);
          }
        }
      }
      frontier_.swap(next_);
    }
    double best = kNegInf;
    for (int d = x[c]; d <= D; ++d) {
      best = std::max(best, score_ == ConeScore::kPerBlock ? sum_[d] / count_[d] : sum_[d]);
    }
    return best;
  }

 private:
  void prepare(const BlockModel& model) {
    if (model_ == &model) return;
    model_ = &model;
    const int D = model.depth();
    prefix_.assign(static_cast<std::size_t>(model.num_columns()) * (D + 1), 0.0);
    for (int c = 0; c < model.num_columns(); ++c) {
      for (int d = 1; d <= D; ++d) {
        prefix_[c * (D + 1) + d] = prefix_[c * (D + 1) + d - 1] + model.value(d, c);
      }
    }
    sum_.assign(D + 1, 0.0);
    count_.assign(D + 1, 0);
    mark_.assign(model.num_columns(), 0);
    stamp_ = 0;
  }

  ConeScore score_;
  const BlockModel* model_ = nullptr;
  std::vector<double> prefix_;
  std::vector<double> sum_;
  std::vector<long long> count_;
  std::vector<unsigned> mark_;
  unsigned stamp_ = 0;
  std::vector<int> frontier_, next_;
};

class ToposortIndex : public ColumnIndex {
 public:
  ToposortIndex(const BlockModel& model, const LpModel& lp, const LpSolution& solution) {
    if (lp.num_blocks != model.num_blocks()) {
      throw ModelError("LP model covers " + std::to_string(lp.num_blocks) +
                       " blocks, the block model has " +
                       std::to_string(model.num_blocks()));
    }
    times_ = expected_extraction_times(lp, solution);
  }
  std::string name() const override { return "toposort"; }
  double operator()(const BlockModel& model, const Profile& x, int c) override {
    if (x[c] > model.depth()) return kNegInf;
    return -times_[model.block_index(x[c], c)];
  }

 private:
  std::vector<double> times_;
};

}  // namespace

std::unique_ptr<ColumnIndex> make_greedy_index() { return std::make_unique<GreedyIndex>(); }

std::unique_ptr<ColumnIndex> make_gittins_index(double rho) {
  return std::make_unique<GittinsIndex>(rho);
}

std::unique_ptr<ColumnIndex> make_cone_index(ConeScore score) {
  return std::make_unique<ConeIndex>(score);
}

std::unique_ptr<ColumnIndex> make_toposort_index(const BlockModel& model,
                                                 const LpModel& lp,
                                                 const LpSolution& solution) {
  return std::make_unique<ToposortIndex>(model, lp, solution);
}

std::vector<int> StrategyRun::blocks(const BlockModel& model) const {
  std::vector<int> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(model.block_index(s.depth, s.column));
  return out;
}

StrategyRun run_index_strategy(const BlockModel& model, ColumnIndex& index,
                               const DiscountSchedule& disc,
                               const StrategyOptions& options) {
  const int C = model.num_columns();
  const int D = model.depth();
  Profile x = Profile::surface(model);
  std::vector<double> value(C);
  std::vector<char> queued(C, 0);
  std::set<std::pair<double, int>> candidates;  // (-index, column)

  const auto eligible = [&](int c) {
    if (x[c] > D) return false;
    return !options.constrained || can_extract(model, x, c);
  };
  const auto refresh = [&](int c) {
    if (queued[c]) candidates.erase({-value[c], c});
    queued[c] = eligible(c);
    if (queued[c]) candidates.insert({-value[c], c});
  };
  for (int c = 0; c < C; ++c) {
    value[c] = index(model, x, c);
    refresh(c);
  }

  StrategyRun run;
  std::int64_t t = 0;
  while (!candidates.empty()) {
    const auto [neg, c] = *candidates.begin();
    if (options.stop == StopRule::kNonPositive && -neg <= 0.0) break;
    const int depth = x[c];
    run.npv += disc.factor(t++) * model.value(depth, c);
    run.sequence.push_back(Decision::column(c));
    run.steps.push_back({c, depth, -neg});

    candidates.erase(candidates.begin());
    queued[c] = 0;
    ++x.depths[c];
    value[c] = index(model, x, c);
    refresh(c);
    if (options.constrained) {
      for (int nb : model.neighbors(c)) refresh(nb);
    }
  }
  return run;
}

double gittins_upper_bound(const BlockModel& model, double rho) {
  check_rate(rho);
  GittinsIndex index(rho);
  return run_index_strategy(model, index, DiscountSchedule::per_block(rho),
                            {false, StopRule::kNonPositive})
      .npv;
}

double yearly_bound_adapter(const BlockModel& model, double rho_year, int blocks_per_year) {
  check_rate(rho_year);
  if (blocks_per_year < 1) throw UsageError("blocks per year must be >= 1");
  return gittins_upper_bound(model, std::pow(rho_year, 1.0 / blocks_per_year)) / rho_year;
}

double index_upper_bound(const BlockModel& model, const DiscountSchedule& disc) {
  if (disc.is_geometric()) return gittins_upper_bound(model, disc.rate());
  return yearly_bound_adapter(model, disc.rate(), disc.blocks_per_year());
}

}  // namespace opbsp
