#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "opbsp/milp.hpp"

namespace opbsp {

enum class LpFormat { kLp, kMps };

std::string to_string(LpFormat format);
// "lp" or "mps".
LpFormat lp_format_from_string(const std::string& text);
// By extension: .mps is MPS, everything else LP.
LpFormat lp_format_for_path(const std::filesystem::path& path);

// CPLEX LP text. Every variable appears in the objective (zero coefficients
// included) so that reading the file back restores the variable order.
void write_lp(const LpModel& model, std::ostream& out);
// MPS with an OBJSENSE section, integer markers and explicit bounds. Names
// longer than eight characters are written in free format.
void write_mps(const LpModel& model, std::ostream& out);
void export_lp(const LpModel& model, const std::filesystem::path& path,
               LpFormat format);

LpModel read_lp(std::istream& in);
LpModel read_mps(std::istream& in);
LpModel read_lp_file(const std::filesystem::path& path);

// {"status", "objective", "iterations", "values": {name: value}}.
nlohmann::json solution_to_json(const LpModel& model, const LpSolution& solution);
// Accepts the object above or a bare {name: value} map; variables that are
// not mentioned are zero.
std::vector<double> solution_from_json(const LpModel& model,
                                       const nlohmann::json& j);

}  // namespace opbsp
