#pragma once

#include <climits>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "opbsp/block_model.hpp"
#include "opbsp/capacities.hpp"

namespace opbsp {

inline constexpr int kNever = INT_MAX;

// Ordered distinct flat block indices, predecessors first.
struct BlockSequence {
  std::vector<int> blocks;
};

// tau: block -> period in [1, horizon] or kNever.
struct Schedule {
  std::vector<int> period;
  int horizon = 0;

  static Schedule none(int num_blocks, int horizon) {
    return {std::vector<int>(num_blocks, kNever), horizon};
  }
  // Highest period that holds a block, 0 if nothing is extracted.
  int last_period() const;
  int num_extracted() const;
};

struct PackingResult {
  Schedule schedule;
  std::vector<std::string> warnings;
};

// Fills period t = 1..T with the next blocks of the sequence while the
// blocks added in period t fit every upper capacity, then moves on. A block
// that does not fit an empty period leaves that period empty (one warning per
// such period); under constant capacities it and every later block stay
// unextracted.
PackingResult sequence_to_schedule(const BlockSequence& seq, const BlockModel& model,
                                   const Capacities& capacities, int horizon);

enum class CleanMode { kTrailing, kLastOnly };

// Drops the last nonempty period while its undiscounted value is negative
// (kTrailing keeps going backwards, kLastOnly stops after one period).
Schedule clean_final_schedule(const Schedule& s, const BlockModel& model,
                              CleanMode mode = CleanMode::kTrailing);

// sum_t rho^t sum_{tau(i) = t} v_i.
double schedule_npv(const Schedule& s, const BlockModel& model, double rho);

struct ValidationReport {
  bool ok = true;
  std::string kind;     // period, precedence, capacity
  std::string message;  // first violation
};

ValidationReport validate_schedule(const Schedule& s, const BlockModel& model,
                                   const PrecedenceArcs& arcs,
                                   const Capacities& capacities);

// Exact optimum of the OPBSP instance whose blocks are those of the sequence
// and whose precedences chain consecutive blocks. The extracted set is then
// a prefix of the sequence, so a dynamic program over (prefix, period) solves
// it. Throws BudgetExceeded once `work_budget` segment checks are spent.
Schedule resequence_and_resolve(const BlockSequence& seq, const BlockModel& model,
                                int horizon, double rho, const Capacities& capacities,
                                std::size_t work_budget = 200'000'000);

// {block_id: period | "never"} in block order.
nlohmann::ordered_json schedule_to_json(const Schedule& s);
// Throws ParseError on unknown ids or bad periods. A block listed twice is an
// error too unless `duplicates` is given, which then collects such blocks.
Schedule schedule_from_json_text(const std::string& text, int num_blocks, int horizon,
                                 std::vector<int>* duplicates = nullptr);

// period,blocks,<resource...>,value,discounted_value,cumulative_npv
void write_pit_report(std::ostream& out, const Schedule& s, const BlockModel& model,
                      double rho);

nlohmann::ordered_json sequence_to_json(const BlockSequence& seq);
BlockSequence sequence_from_json(const nlohmann::json& j, int num_blocks);

}  // namespace opbsp
