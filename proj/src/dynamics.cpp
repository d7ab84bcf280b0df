#include "opbsp/dynamics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>

#include "opbsp/error.hpp"

namespace opbsp {

std::string to_string(Decision d) {
  return d.is_retire() ? "retire" : "c" + std::to_string(d.column());
}

DiscountSchedule DiscountSchedule::per_block(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw UsageError("per-block discount must lie in (0, 1]");
  }
  return DiscountSchedule(rho, 0);
}

DiscountSchedule DiscountSchedule::yearly(double rho_year, int blocks_per_year) {
  if (!(rho_year > 0.0 && rho_year <= 1.0)) {
    throw UsageError("yearly discount must lie in (0, 1]");
  }
  if (blocks_per_year < 1) throw UsageError("blocks per year must be >= 1");
  return DiscountSchedule(rho_year, blocks_per_year);
}

double DiscountSchedule::factor(std::int64_t t) const {
  const std::int64_t exponent = is_geometric() ? t : t / blocks_per_year_;
  return std::pow(rate_, static_cast<double>(exponent));
}

bool is_admissible(const BlockModel& model, const Profile& x) {
  if (static_cast<int>(x.depths.size()) != model.num_columns()) return false;
  const int k = model.slope_k();
  for (int c = 0; c < model.num_columns(); ++c) {
    if (x[c] < 1 || x[c] > model.depth() + 1) return false;
    for (int nb : model.neighbors(c)) {
      if (std::abs(x[nb] - x[c]) > k) return false;
    }
  }
  return true;
}

bool can_extract(const BlockModel& model, const Profile& x, int column) {
  const int next = x[column] + 1;
  if (next > model.depth() + 1) return false;
  for (int nb : model.neighbors(column)) {
    if (next - x[nb] > model.slope_k()) return false;
  }
  return true;
}

Profile transition(const BlockModel& model, const Profile& x, Decision c) {
  if (c.is_retire()) return x;
  const int col = c.column();
  if (col < 0 || col >= model.num_columns()) {
    throw InadmissibleDecision("column " + std::to_string(col) +
                               " does not exist");
  }
  if (x[col] > model.depth()) {
    throw InadmissibleDecision("column " + std::to_string(col) +
                               " is exhausted");
  }
  const int next = x[col] + 1;
  for (int nb : model.neighbors(col)) {
    if (next - x[nb] > model.slope_k()) {
      throw InadmissibleDecision(
          "digging column " + std::to_string(col) + " to depth " +
          std::to_string(next) + " violates the slope with neighbour column " +
          std::to_string(nb) + " at depth " + std::to_string(x[nb]) +
          " (k=" + std::to_string(model.slope_k()) + ")");
    }
  }
  Profile y = x;
  y.depths[col] = next;
  return y;
}

std::vector<Decision> admissible_decisions(const BlockModel& model,
                                           const Profile& x) {
  std::vector<Decision> out;
  for (int c = 0; c < model.num_columns(); ++c) {
    if (can_extract(model, x, c)) out.push_back(Decision::column(c));
  }
  out.push_back(Decision::retire());
  return out;
}

double sequence_npv(const BlockModel& model, std::span<const Decision> seq,
                    const DiscountSchedule& disc) {
  Profile x = Profile::surface(model);
  double total = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const Decision c = seq[t];
    if (c.is_retire()) continue;
    try {
      const double w = model.value(x[c.column()], c.column());
      x = transition(model, x, c);
      total += disc.factor(static_cast<std::int64_t>(t)) * w;
    } catch (const InadmissibleDecision& e) {
      throw InadmissibleDecision("step " + std::to_string(t) + ": " + e.what());
    }
  }
  return total;
}

std::vector<Profile> replay(const BlockModel& model,
                            std::span<const Decision> seq) {
  std::vector<Profile> trace{Profile::surface(model)};
  trace.reserve(seq.size() + 1);
  for (Decision c : seq) trace.push_back(transition(model, trace.back(), c));
  return trace;
}

// ---------------------------------------------------------------------------
// Exact dynamic programming

namespace {

// Profiles are memoised as byte strings, one byte per column.
class DpSolver {
 public:
  DpSolver(const BlockModel& model, const DiscountSchedule& disc, int horizon,
           std::size_t budget)
      : model_(model), disc_(disc), horizon_(horizon), budget_(budget) {}

  DpResult solve() {
    std::string key(model_.num_columns(), static_cast<char>(1));
    DpResult result;
    stationary_ = disc_.is_geometric() && horizon_ >= model_.num_blocks();
    if (stationary_) {
      result.value = stationary_value(key);
      reconstruct_stationary(key, result.sequence);
    } else {
      result.value = timed_value(0, key);
      reconstruct_timed(key, result.sequence);
    }
    result.states = memo_.size();
    return result;
  }

 private:
  bool extractable(const std::string& key, int c) const {
    const int next = static_cast<unsigned char>(key[c]) + 1;
    if (next > model_.depth() + 1) return false;
    for (int nb : model_.neighbors(c)) {
      if (next - static_cast<unsigned char>(key[nb]) > model_.slope_k()) return false;
    }
    return true;
  }

  double top_value(const std::string& key, int c) const {
    return model_.value(static_cast<unsigned char>(key[c]), c);
  }

  void remember(const std::string& key, double v) {
    if (memo_.size() >= budget_) {
      throw BudgetExceeded("dynamic programming state budget of " +
                           std::to_string(budget_) + " exceeded");
    }
    memo_.emplace(key, v);
  }

  // V(x) = max(0, max_c w(x_c, c) + rho * V(F(x, c))) for per-block
  // geometric discounting; stopping is never worse than idling then resuming.
  double stationary_value(std::string& key) {
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double best = 0.0;
    for (int c = 0; c < model_.num_columns(); ++c) {
      if (!extractable(key, c)) continue;
      best = std::max(best, stationary_q(key, c));
    }
    remember(key, best);
    return best;
  }

  double stationary_q(std::string& key, int c) {
    const double w = top_value(key, c);
    ++key[c];
    const double next = stationary_value(key);
    --key[c];
    return w + disc_.rate() * next;
  }

  void reconstruct_stationary(std::string key, std::vector<Decision>& out) {
    while (true) {
      const double best = memo_.at(key);
      int chosen = -1;
      for (int c = 0; c < model_.num_columns() && chosen < 0; ++c) {
        if (extractable(key, c) && stationary_q(key, c) == best) chosen = c;
      }
      if (chosen < 0) return;
      out.push_back(Decision::column(chosen));
      ++key[chosen];
    }
  }

  // V(t, x) = max(V(t+1, x), max_c rho(t) w(x_c, c) + V(t+1, F(x, c))).
  double timed_value(int t, std::string& key) {
    if (t >= horizon_) return 0.0;
    std::string mkey = timed_key(t, key);
    if (auto it = memo_.find(mkey); it != memo_.end()) return it->second;
    double best = timed_value(t + 1, key);  // retire this step
    bool any = false;
    for (int c = 0; c < model_.num_columns(); ++c) {
      if (!extractable(key, c)) continue;
      any = true;
      best = std::max(best, timed_q(t, key, c));
    }
    if (!any) best = 0.0;
    remember(mkey, best);
    return best;
  }

  double timed_q(int t, std::string& key, int c) {
    const double w = top_value(key, c);
    ++key[c];
    const double next = timed_value(t + 1, key);
    --key[c];
    return disc_.factor(t) * w + next;
  }

  static std::string timed_key(int t, const std::string& key) {
    std::string k(reinterpret_cast<const char*>(&t), sizeof t);
    return k + key;
  }

  void reconstruct_timed(std::string key, std::vector<Decision>& out) {
    for (int t = 0; t < horizon_; ++t) {
      const double best = timed_value(t, key);
      int chosen = -1;
      for (int c = 0; c < model_.num_columns() && chosen < 0; ++c) {
        if (extractable(key, c) && timed_q(t, key, c) == best) chosen = c;
      }
      if (chosen < 0) {
        out.push_back(Decision::retire());
        continue;
      }
      out.push_back(Decision::column(chosen));
      ++key[chosen];
    }
    while (!out.empty() && out.back().is_retire()) out.pop_back();
  }

  const BlockModel& model_;
  const DiscountSchedule& disc_;
  int horizon_;
  std::size_t budget_;
  bool stationary_ = false;
  std::unordered_map<std::string, double> memo_;
};

}  // namespace

DpResult dp_solve(const BlockModel& model, const DiscountSchedule& disc,
                  const DpOptions& options) {
  if (model.depth() > 250) {
    throw BudgetExceeded("dynamic programming supports depth <= 250");
  }
  const int horizon = options.horizon.value_or(model.num_blocks());
  if (horizon < 0) throw UsageError("horizon must be non-negative");
  // Every profile with depths in {1, ..., k+1} is admissible and reachable.
  const int spread = std::min(model.slope_k() + 1, model.depth() + 1);
  if (model.num_columns() * std::log2(static_cast<double>(spread)) >
      std::log2(static_cast<double>(std::max<std::size_t>(options.state_budget, 1)))) {
    throw BudgetExceeded(fmt::format(
        "dynamic programming would visit at least {}^{} profiles, above the state budget of {}",
        spread, model.num_columns(), options.state_budget));
  }
  DpSolver solver(model, disc, horizon, options.state_budget);
  return solver.solve();
}

double brute_force_opt(const BlockModel& model, const DiscountSchedule& disc,
                       std::optional<int> horizon, std::size_t path_budget) {
  const int T = horizon.value_or(model.num_blocks());
  Profile x = Profile::surface(model);
  std::size_t paths = 0;
  int remaining = model.num_blocks();
  double best = 0.0;
  std::vector<double> factors(static_cast<std::size_t>(std::max(T, 0)));
  for (int t = 0; t < T; ++t) factors[t] = disc.factor(t);

  std::function<void(int, double)> explore = [&](int t, double acc) {
    if (t == T || remaining == 0) {
      if (++paths > path_budget) {
        throw BudgetExceeded("brute-force path budget of " +
                             std::to_string(path_budget) + " exceeded");
      }
      best = std::max(best, acc);
      return;
    }
    for (int c = 0; c < model.num_columns(); ++c) {
      if (!can_extract(model, x, c)) continue;
      const double w = model.value(x[c], c);
      ++x.depths[c];
      --remaining;
      explore(t + 1, acc + factors[t] * w);
      ++remaining;
      --x.depths[c];
    }
    explore(t + 1, acc);  // retire
  };
  explore(0, 0.0);
  return best;
}

std::uint64_t state_space_count(Dims dims, int slope_k,
                                Neighborhood neighborhood) {
  if (dims.nx < 1 || dims.ny < 1 || dims.depth < 0 || slope_k < 1) {
    throw UsageError("state_space_count needs positive dimensions and k >= 1");
  }
  // Transfer matrix over grid rows; both neighbourhoods are symmetric under
  // transposition, so sweep along the longer side.
  const int width = std::min(dims.nx, dims.ny);
  const int height = std::max(dims.nx, dims.ny);
  const bool diagonal = neighborhood == Neighborhood::kEight && width > 1;
  const int levels = dims.depth + 1;

  constexpr std::size_t kMaxRowStates = 50'000;
  std::vector<std::vector<int>> rows;
  std::vector<int> row(width, 1);
  std::function<void(int)> enumerate = [&](int i) {
    if (i == width) {
      rows.push_back(row);
      if (rows.size() > kMaxRowStates) {
        throw BudgetExceeded("state_space_count: too many row states");
      }
      return;
    }
    for (int v = 1; v <= levels; ++v) {
      if (i > 0 && std::abs(v - row[i - 1]) > slope_k) continue;
      row[i] = v;
      enumerate(i + 1);
    }
  };
  enumerate(0);

  const auto compatible = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (int i = 0; i < width; ++i) {
      if (std::abs(a[i] - b[i]) > slope_k) return false;
      if (diagonal) {
        if (i > 0 && std::abs(a[i] - b[i - 1]) > slope_k) return false;
        if (i + 1 < width && std::abs(a[i] - b[i + 1]) > slope_k) return false;
      }
    }
    return true;
  };

  using Wide = unsigned __int128;
  constexpr Wide kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<Wide> count(rows.size(), 1);
  for (int r = 1; r < height; ++r) {
    std::vector<Wide> next(rows.size(), 0);
    for (std::size_t b = 0; b < rows.size(); ++b) {
      for (std::size_t a = 0; a < rows.size(); ++a) {
        if (count[a] != 0 && compatible(rows[a], rows[b])) next[b] += count[a];
      }
      if (next[b] > kMax) throw BudgetExceeded("state_space_count overflow");
    }
    count = std::move(next);
  }
  Wide total = 0;
  for (Wide c : count) {
    total += c;
    if (total > kMax) throw BudgetExceeded("state_space_count overflow");
  }
  return static_cast<std::uint64_t>(total);
}

}  // namespace opbsp
