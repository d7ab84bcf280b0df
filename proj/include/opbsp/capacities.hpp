#pragma once

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "opbsp/block_model.hpp"

namespace opbsp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-period bounds C-_{rt} <= sum a(i, r) <= C+_{rt} on resource use.
// Periods are 1-based. A per-period vector shorter than the horizon repeats
// its last entry; an empty vector means unbounded.
struct ResourceLimit {
  std::string resource;
  std::vector<double> upper;
  std::vector<double> lower;

  double upper_at(int t) const {
    if (upper.empty()) return kInf;
    return upper[std::min<std::size_t>(t - 1, upper.size() - 1)];
  }
  double lower_at(int t) const {
    if (lower.empty()) return -kInf;
    return lower[std::min<std::size_t>(t - 1, lower.size() - 1)];
  }
};

struct Capacities {
  std::vector<ResourceLimit> limits;

  static Capacities unlimited() { return {}; }
  static Capacities constant(std::string resource, double upper_per_period) {
    return {{{std::move(resource), {upper_per_period}, {}}}};
  }

  bool empty() const { return limits.empty(); }

  // JSON object {resource: upper} or {resource: {"upper": x | [..],
  // "lower": y | [..], "per_day": z, "days_per_year": 365}}. `per_day`
  // multiplies a daily figure into an annual period capacity.
  static Capacities from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Column index of each limit's resource in `model`; throws ModelError for
  // resources the model does not carry.
  std::vector<int> resolve(const BlockModel& model) const;
  std::vector<int> resolve(const std::vector<std::string>& names) const;
};

}  // namespace opbsp
