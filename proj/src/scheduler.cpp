#include "opbsp/scheduler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_set>

#include "opbsp/error.hpp"

namespace opbsp {

int Schedule::last_period() const {
  int last = 0;
  for (int p : period) {
    if (p != kNever) last = std::max(last, p);
  }
  return last;
}

int Schedule::num_extracted() const {
  return static_cast<int>(std::count_if(period.begin(), period.end(),
                                        [](int p) { return p != kNever; }));
}

namespace {

void check_sequence(const BlockSequence& seq, int num_blocks) {
  std::vector<char> seen(num_blocks, 0);
  for (int b : seq.blocks) {
    if (b < 0 || b >= num_blocks) {
      throw ModelError("sequence names unknown block " + std::to_string(b));
    }
    if (seen[b]) throw ModelError("sequence lists block " + std::to_string(b) + " twice");
    seen[b] = 1;
  }
}

double tolerance(double cap) { return 1e-9 * std::max(1.0, std::abs(cap)); }

}  // namespace

PackingResult sequence_to_schedule(const BlockSequence& seq, const BlockModel& model,
                                   const Capacities& capacities, int horizon) {
  if (horizon < 0) throw UsageError("horizon must be >= 0");
  check_sequence(seq, model.num_blocks());
  const auto cols = capacities.resolve(model);
  const std::size_t L = cols.size();
  PackingResult result{Schedule::none(model.num_blocks(), horizon), {}};
  const std::size_t n = seq.blocks.size();
  std::size_t k = 0;
  std::vector<double> used(L);
  for (int t = 1; t <= horizon && k < n; ++t) {
    std::fill(used.begin(), used.end(), 0.0);
    bool empty = true;
    while (k < n) {
      const int b = seq.blocks[k];
      bool fits = true;
      for (std::size_t l = 0; l < L && fits; ++l) {
        fits = used[l] + model.resource_use(b, cols[l]) <= capacities.limits[l].upper_at(t);
      }
      if (!fits) break;
      for (std::size_t l = 0; l < L; ++l) used[l] += model.resource_use(b, cols[l]);
      result.schedule.period[b] = t;
      empty = false;
      ++k;
    }
    if (empty && k < n) {
      result.warnings.push_back(fmt::format(
          "block {} exceeds the capacity of period {} on its own; the period stays empty",
          seq.blocks[k], t));
    }
  }
  return result;
}

Schedule clean_final_schedule(const Schedule& s, const BlockModel& model, CleanMode mode) {
  Schedule out = s;
  for (int t = out.last_period(); t > 0; t = out.last_period()) {
    double total = 0.0;
    for (std::size_t b = 0; b < out.period.size(); ++b) {
      if (out.period[b] == t) total += model.block_value(static_cast<int>(b));
    }
    if (total >= 0.0) break;
    for (int& p : out.period) {
      if (p == t) p = kNever;
    }
    if (mode == CleanMode::kLastOnly) break;
  }
  return out;
}

double schedule_npv(const Schedule& s, const BlockModel& model, double rho) {
  double npv = 0.0;
  for (std::size_t b = 0; b < s.period.size(); ++b) {
    if (s.period[b] == kNever) continue;
    npv += std::pow(rho, s.period[b]) * model.block_value(static_cast<int>(b));
  }
  return npv;
}

ValidationReport validate_schedule(const Schedule& s, const BlockModel& model,
                                   const PrecedenceArcs& arcs,
                                   const Capacities& capacities) {
  const auto fail = [](std::string kind, std::string message) {
    return ValidationReport{false, std::move(kind), std::move(message)};
  };
  const auto when = [](int p) { return p == kNever ? std::string("never") : std::to_string(p); };
  if (static_cast<int>(s.period.size()) != model.num_blocks()) {
    return fail("period", fmt::format("schedule covers {} blocks, model has {}",
                                      s.period.size(), model.num_blocks()));
  }
  for (std::size_t b = 0; b < s.period.size(); ++b) {
    const int p = s.period[b];
    if (p != kNever && (p < 1 || p > s.horizon)) {
      return fail("period", fmt::format("block {} is assigned period {} outside [1, {}]", b,
                                        p, s.horizon));
    }
  }
  // A period per block makes the pits nested and every block extracted at
  // most once; precedence is what remains to check.
  for (const auto& [i, j] : arcs.arcs) {
    if (s.period[i] < s.period[j]) {
      return fail("precedence",
                  fmt::format("block {} is extracted in period {} but its predecessor {} "
                              "in period {}",
                              i, when(s.period[i]), j, when(s.period[j])));
    }
  }
  const auto cols = capacities.resolve(model);
  const int T = s.last_period();
  std::vector<double> used(static_cast<std::size_t>(T + 1) * cols.size(), 0.0);
  for (std::size_t b = 0; b < s.period.size(); ++b) {
    const int p = s.period[b];
    if (p == kNever) continue;
    for (std::size_t l = 0; l < cols.size(); ++l) {
      used[p * cols.size() + l] += model.resource_use(static_cast<int>(b), cols[l]);
    }
  }
  for (int t = 1; t <= T; ++t) {
    for (std::size_t l = 0; l < cols.size(); ++l) {
      const double cap = capacities.limits[l].upper_at(t);
      const double u = used[t * cols.size() + l];
      if (u > cap + tolerance(cap)) {
        return fail("capacity", fmt::format("period {} uses {} of {}, above the capacity {}",
                                            t, u, capacities.limits[l].resource, cap));
      }
    }
  }
  return {};
}

Schedule resequence_and_resolve(const BlockSequence& seq, const BlockModel& model,
                                int horizon, double rho, const Capacities& capacities,
                                std::size_t work_budget) {
  if (horizon < 1) throw UsageError("horizon must be >= 1");
  check_sequence(seq, model.num_blocks());
  const auto cols = capacities.resolve(model);
  const std::size_t L = cols.size();
  const int n = static_cast<int>(seq.blocks.size());
  const std::size_t table = static_cast<std::size_t>(horizon + 1) * (n + 1);
  if (table > work_budget) {
    throw BudgetExceeded(fmt::format(
        "chain re-solve needs a {} x {} table, above the budget of {}; use the "
        "greedy packing instead",
        horizon, n + 1, work_budget));
  }
  for (int b : seq.blocks) {
    for (std::size_t l = 0; l < L; ++l) {
      if (model.resource_use(b, cols[l]) < 0.0) {
        throw ModelError("chain re-solve needs nonnegative resource use");
      }
    }
  }
  std::vector<double> value(n + 1, 0.0);
  std::vector<double> use((n + 1) * L, 0.0);
  for (int k = 1; k <= n; ++k) {
    const int b = seq.blocks[k - 1];
    value[k] = value[k - 1] + model.block_value(b);
    for (std::size_t l = 0; l < L; ++l) {
      use[k * L + l] = use[(k - 1) * L + l] + model.resource_use(b, cols[l]);
    }
  }
  constexpr double kMinusInf = -std::numeric_limits<double>::infinity();
  // best[k]: optimum over periods 1..t with exactly the first k blocks taken.
  std::vector<double> best(n + 1, kMinusInf);
  std::vector<double> next(n + 1);
  std::vector<int> parent(table, -1);
  best[0] = 0.0;
  std::size_t work = 0;
  for (int t = 1; t <= horizon; ++t) {
    const double disc = std::pow(rho, t);
    for (int k = 0; k <= n; ++k) {
      next[k] = kMinusInf;
      for (int j = k; j >= 0; --j) {
        if (++work > work_budget) {
          throw BudgetExceeded(fmt::format(
              "chain re-solve exceeded its budget of {} segment checks; use the "
              "greedy packing instead",
              work_budget));
        }
        bool over = false;
        bool under = false;
        for (std::size_t l = 0; l < L; ++l) {
          const double u = use[k * L + l] - use[j * L + l];
          const double hi = capacities.limits[l].upper_at(t);
          const double lo = capacities.limits[l].lower_at(t);
          over = over || u > hi + tolerance(hi);
          under = under || u < lo - tolerance(lo);
        }
        if (over) break;  // longer segments use at least as much
        if (under || best[j] == kMinusInf) continue;
        const double cand = best[j] + disc * (value[k] - value[j]);
        if (cand > next[k]) {
          next[k] = cand;
          parent[t * (n + 1) + k] = j;
        }
      }
    }
    best.swap(next);
  }
  int k = 0;
  for (int m = 1; m <= n; ++m) {
    if (best[m] > best[k]) k = m;
  }
  if (best[k] == kMinusInf) {
    throw Infeasible("the chain instance has no schedule meeting the capacity bounds");
  }
  Schedule s = Schedule::none(model.num_blocks(), horizon);
  for (int t = horizon; t >= 1; --t) {
    const int j = parent[t * (n + 1) + k];
    for (int m = j; m < k; ++m) s.period[seq.blocks[m]] = t;
    k = j;
  }
  return s;
}

nlohmann::ordered_json schedule_to_json(const Schedule& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t b = 0; b < s.period.size(); ++b) {
    if (s.period[b] == kNever) {
      j[std::to_string(b)] = "never";
    } else {
      j[std::to_string(b)] = s.period[b];
    }
  }
  return j;
}

Schedule schedule_from_json_text(const std::string& text, int num_blocks, int horizon,
                                 std::vector<int>* duplicates) {
  std::unordered_set<std::string> keys;
  std::vector<std::string> repeated;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(
        text, [&](int depth, nlohmann::json::parse_event_t event, nlohmann::json& parsed) {
          if (event == nlohmann::json::parse_event_t::key && depth == 1) {
            const std::string key = parsed.get<std::string>();
            if (!keys.insert(key).second) repeated.push_back(key);
          }
          return true;
        });
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed schedule JSON: ") + e.what());
  }
  if (!repeated.empty() && duplicates == nullptr) {
    throw ParseError("block " + repeated.front() + " is scheduled more than once");
  }
  if (!j.is_object()) throw ParseError("schedule must be a JSON object");
  Schedule s = Schedule::none(num_blocks, horizon);
  for (const auto& [key, v] : j.items()) {
    int b = -1;
    try {
      std::size_t used = 0;
      b = std::stoi(key, &used);
      if (used != key.size()) b = -1;
    } catch (const std::exception&) {
      b = -1;
    }
    if (b < 0 || b >= num_blocks) throw ParseError("schedule names unknown block '" + key + "'");
    if (v.is_string() && v.get<std::string>() == "never") continue;
    if (!v.is_number_integer()) {
      throw ParseError("period of block " + key + " must be an integer or \"never\"");
    }
    s.period[b] = v.get<int>();
  }
  if (duplicates != nullptr) {
    for (const auto& key : repeated) duplicates->push_back(std::stoi(key));
  }
  return s;
}

void write_pit_report(std::ostream& out, const Schedule& s, const BlockModel& model,
                      double rho) {
  const int R = model.num_resources();
  out << "period,blocks";
  for (const auto& name : model.resource_names()) out << ',' << name;
  out << ",value,discounted_value,cumulative_npv\n";
  const int T = s.last_period();
  std::vector<int> count(T + 1, 0);
  std::vector<double> value(T + 1, 0.0);
  std::vector<double> use(static_cast<std::size_t>(T + 1) * R, 0.0);
  for (std::size_t b = 0; b < s.period.size(); ++b) {
    const int p = s.period[b];
    if (p == kNever) continue;
    ++count[p];
    value[p] += model.block_value(static_cast<int>(b));
    for (int r = 0; r < R; ++r) use[p * R + r] += model.resource_use(static_cast<int>(b), r);
  }
  double cumulative = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double disc = std::pow(rho, t) * value[t];
    cumulative += disc;
    out << t << ',' << count[t];
    for (int r = 0; r < R; ++r) out << ',' << fmt::format("{}", use[t * R + r]);
    out << ',' << fmt::format("{}", value[t]) << ',' << fmt::format("{}", disc) << ','
        << fmt::format("{}", cumulative) << '\n';
  }
}

nlohmann::ordered_json sequence_to_json(const BlockSequence& seq) {
  nlohmann::ordered_json j;
  j["blocks"] = seq.blocks;
  return j;
}

BlockSequence sequence_from_json(const nlohmann::json& j, int num_blocks) {
  BlockSequence seq;
  try {
    const nlohmann::json& list = j.is_array() ? j : j.at("blocks");
    seq.blocks = list.get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed sequence JSON: ") + e.what());
  }
  check_sequence(seq, num_blocks);
  return seq;
}

}  // namespace opbsp
