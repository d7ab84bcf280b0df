#include "opbsp/capacities.hpp"

#include <algorithm>

#include "opbsp/error.hpp"

namespace opbsp {

namespace {

std::vector<double> read_bound(const nlohmann::json& j) {
  if (j.is_null()) return {};
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

nlohmann::json write_bound(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  if (v.size() == 1) return v.front();
  return v;
}

}  // namespace

Capacities Capacities::from_json(const nlohmann::json& j) {
  Capacities caps;
  if (j.is_null()) return caps;
  if (!j.is_object()) throw UsageError("capacities must be a JSON object");
  try {
    for (const auto& [name, spec] : j.items()) {
      ResourceLimit limit{name, {}, {}};
      if (spec.is_number() || spec.is_array()) {
        limit.upper = read_bound(spec);
      } else {
        if (spec.contains("per_day")) {
          const double days = spec.value("days_per_year", 365.0);
          limit.upper = {spec.at("per_day").get<double>() * days};
        } else if (spec.contains("upper")) {
          limit.upper = read_bound(spec.at("upper"));
        }
        if (spec.contains("lower")) limit.lower = read_bound(spec.at("lower"));
      }
      caps.limits.push_back(std::move(limit));
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed capacities: ") + e.what());
  }
  return caps;
}

nlohmann::json Capacities::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& l : limits) {
    j[l.resource] = {{"upper", write_bound(l.upper)}, {"lower", write_bound(l.lower)}};
  }
  return j;
}

std::vector<int> Capacities::resolve(const std::vector<std::string>& names) const {
  std::vector<int> out;
  for (const auto& l : limits) {
    const auto it = std::find(names.begin(), names.end(), l.resource);
    if (it == names.end()) {
      throw ModelError("capacity given for unknown resource '" + l.resource + "'");
    }
    out.push_back(static_cast<int>(it - names.begin()));
  }
  return out;
}

std::vector<int> Capacities::resolve(const BlockModel& model) const {
  return resolve(model.resource_names());
}

}  // namespace opbsp
