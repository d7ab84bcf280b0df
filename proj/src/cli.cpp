#include "opbsp/cli.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "opbsp/error.hpp"
#include "opbsp/milp.hpp"

#ifndef OPBSP_VERSION
#define OPBSP_VERSION "0.0.0"
#endif

namespace opbsp {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string stop_name(StopRule s) {
  return s == StopRule::kExhaust ? "exhaust" : "nonpositive";
}

StopRule stop_from_string(const std::string& s) {
  if (s == "exhaust") return StopRule::kExhaust;
  if (s == "nonpositive") return StopRule::kNonPositive;
  throw UsageError("unknown stop rule '" + s + "' (expected exhaust or nonpositive)");
}

std::string score_name(ConeScore s) { return s == ConeScore::kPerBlock ? "per_block" : "raw_sum"; }

ConeScore score_from_string(const std::string& s) {
  if (s == "per_block") return ConeScore::kPerBlock;
  if (s == "raw_sum") return ConeScore::kRawSum;
  throw UsageError("unknown cone score '" + s + "' (expected per_block or raw_sum)");
}

Dims parse_dims(const std::string& text) {
  std::vector<int> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("dims must look like NX,NY,DEPTH, got '" + text + "'");
    }
  }
  if (parts.size() != 3 || parts[0] < 1 || parts[1] < 1 || parts[2] < 1) {
    throw UsageError("dims must be three positive integers NX,NY,DEPTH, got '" + text + "'");
  }
  return {parts[0], parts[1], parts[2]};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

nlohmann::json merged(const nlohmann::json& base, const nlohmann::json& patch) {
  nlohmann::json j = base;
  j.merge_patch(patch);
  return j;
}

template <typename T>
void read_optional(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<T>();
  }
}

template <typename T>
ojson optional_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

}  // namespace

void RunConfig::apply_json(const nlohmann::json& in) {
  if (!in.is_object()) throw UsageError("configuration must be a JSON object");
  // A manifest carries the configuration under "config".
  const nlohmann::json& j = in.contains("config") && in.at("config").is_object()
                                ? in.at("config")
                                : in;
  try {
    if (j.contains("model")) {
      model_path = j.at("model").is_null() ? "" : j.at("model").get<std::string>();
    }
    if (j.contains("dims")) {
      const auto d = j.at("dims").get<std::vector<int>>();
      if (d.size() != 3) throw UsageError("dims must have three entries");
      dims = {d[0], d[1], d[2]};
    }
    if (j.contains("synthetic")) {
      synthetic = SyntheticConfig::from_json(merged(synthetic.to_json(), j.at("synthetic")));
    }
    if (j.contains("load")) load = LoadConfig::from_json(merged(load.to_json(), j.at("load")));
    slope_k = j.value("slope_k", slope_k);
    if (j.contains("neighborhood")) {
      const auto& nb = j.at("neighborhood");
      neighborhood = neighborhood_from_string(
          nb.is_number() ? std::to_string(nb.get<int>()) : nb.get<std::string>());
    }
    strategy = j.value("strategy", strategy);
    if (j.contains("indices")) indices = j.at("indices").get<std::vector<std::string>>();
    constrained = j.value("constrained", constrained);
    if (j.contains("stop")) stop = stop_from_string(j.at("stop").get<std::string>());
    if (j.contains("cone_score")) {
      cone_score = score_from_string(j.at("cone_score").get<std::string>());
    }
    if (j.contains("discount")) {
      const auto& d = j.at("discount");
      discount_mode = d.value("mode", discount_mode);
      rho_year = d.value("rho_year", rho_year);
      blocks_per_year = d.value("blocks_per_year", blocks_per_year);
      read_optional(d, "rho", rho);
      read_optional(d, "rho_sharp", rho_sharp);
    }
    if (j.contains("capacities")) capacities = Capacities::from_json(j.at("capacities"));
    read_optional(j, "horizon", horizon);
    seed = j.value("seed", seed);
    if (j.contains("budgets")) {
      const auto& b = j.at("budgets");
      dp_state_budget = b.value("dp_states", dp_state_budget);
      lp_max_variables = b.value("lp_max_variables", lp_max_variables);
      lp_max_nonzeros = b.value("lp_max_nonzeros", lp_max_nonzeros);
    }
    clean = j.value("clean", clean);
    resolve = j.value("resolve", resolve);
    if (j.contains("lp_format")) lp_format = lp_format_from_string(j.at("lp_format"));
    solve_lp = j.value("solve_lp", solve_lp);
    sequence_path = j.value("sequence", sequence_path);
    schedule_path = j.value("schedule", schedule_path);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed configuration: ") + e.what());
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  SyntheticConfig syn = synthetic;
  syn.slope_k = slope_k;
  syn.neighborhood = neighborhood;
  LoadConfig ld = load;
  ld.slope_k = slope_k;
  ld.neighborhood = neighborhood;
  ojson j;
  j["model"] = model_path.empty() ? ojson(nullptr) : ojson(model_path);
  j["dims"] = {dims.nx, dims.ny, dims.depth};
  j["synthetic"] = ojson::parse(syn.to_json().dump());
  j["load"] = ojson::parse(ld.to_json().dump());
  j["slope_k"] = slope_k;
  j["neighborhood"] = opbsp::to_string(neighborhood);
  j["strategy"] = strategy;
  j["indices"] = indices;
  j["constrained"] = constrained;
  j["stop"] = stop_name(stop);
  j["cone_score"] = score_name(cone_score);
  j["discount"] = {{"mode", discount_mode},
                   {"rho_year", rho_year},
                   {"blocks_per_year", blocks_per_year},
                   {"rho", optional_json(rho)},
                   {"rho_sharp", optional_json(rho_sharp)}};
  j["capacities"] = ojson::parse(capacities.to_json().dump());
  j["horizon"] = optional_json(horizon);
  j["seed"] = seed;
  j["budgets"] = {{"dp_states", dp_state_budget},
                  {"lp_max_variables", lp_max_variables},
                  {"lp_max_nonzeros", lp_max_nonzeros}};
  j["clean"] = clean;
  j["resolve"] = resolve;
  j["lp_format"] = opbsp::to_string(lp_format);
  j["solve_lp"] = solve_lp;
  j["sequence"] = sequence_path;
  j["schedule"] = schedule_path;
  return j;
}

DiscountSchedule RunConfig::discount() const {
  if (discount_mode == "per_block") return DiscountSchedule::per_block(rho.value_or(rho_year));
  if (discount_mode != "yearly") {
    throw UsageError("unknown discount mode '" + discount_mode +
                     "' (expected yearly or per_block)");
  }
  if (blocks_per_year == 1) return DiscountSchedule::per_block(rho_year);
  return DiscountSchedule::yearly(rho_year, blocks_per_year);
}

double RunConfig::gittins_rate() const {
  if (rho_sharp) return *rho_sharp;
  const DiscountSchedule d = discount();
  return d.is_geometric() ? d.rate() : std::pow(d.rate(), 1.0 / d.blocks_per_year());
}

double RunConfig::period_rate() const {
  return discount_mode == "per_block" ? rho.value_or(rho_year) : rho_year;
}

BlockModel load_run_model(const RunConfig& config) {
  BlockModel m;
  if (config.model_path.empty()) {
    SyntheticConfig syn = config.synthetic;
    syn.slope_k = config.slope_k;
    syn.neighborhood = config.neighborhood;
    m = generate_synthetic(config.seed, config.dims, syn);
  } else {
    LoadConfig ld = config.load;
    ld.slope_k = config.slope_k;
    ld.neighborhood = config.neighborhood;
    m = read_model_file(config.model_path, ld);
  }
  std::vector<double> use(m.resource_use().begin(), m.resource_use().end());
  return BlockModel(m.dims(), std::vector<double>(m.values().begin(), m.values().end()),
                    m.resource_names(), std::move(use), config.slope_k, config.neighborhood);
}

int resolve_horizon(const RunConfig& config, const BlockModel& model) {
  if (config.horizon) {
    if (*config.horizon < 1) throw UsageError("horizon must be >= 1");
    return *config.horizon;
  }
  const auto cols = config.capacities.resolve(model);
  double periods = 1.0;
  for (std::size_t l = 0; l < cols.size(); ++l) {
    const double cap = config.capacities.limits[l].upper_at(1);
    if (!std::isfinite(cap) || cap <= 0.0) continue;
    double total = 0.0;
    for (int b = 0; b < model.num_blocks(); ++b) total += model.resource_use(b, cols[l]);
    periods = std::max(periods, std::ceil(total / cap));
  }
  return static_cast<int>(periods);
}

namespace {

SimplexOptions simplex_options(const RunConfig& config) {
  SimplexOptions o;
  o.max_variables = config.lp_max_variables;
  o.max_nonzeros = config.lp_max_nonzeros;
  return o;
}

LpModel build_run_lp(const RunConfig& config, const BlockModel& model) {
  return build_opbsp_model(model, derive_precedences(model), resolve_horizon(config, model),
                           config.period_rate(), config.capacities);
}

void raise_for_status(const LpSolution& sol) {
  switch (sol.status) {
    case LpStatus::kOptimal: return;
    case LpStatus::kBudgetExceeded: throw BudgetExceeded("LP relaxation: " + sol.message);
    case LpStatus::kInfeasible: throw Infeasible("LP relaxation is infeasible");
    case LpStatus::kUnbounded: throw Error("LP relaxation is unbounded");
  }
}

}  // namespace

std::unique_ptr<ColumnIndex> make_index(const std::string& name, const RunConfig& config,
                                        const BlockModel& model) {
  if (name == "greedy") return make_greedy_index();
  if (name == "gittins") return make_gittins_index(config.gittins_rate());
  if (name == "cone") return make_cone_index(config.cone_score);
  if (name == "toposort") {
    const LpModel lp = build_run_lp(config, model);
    const LpSolution sol = solve_lp_relaxation(lp, simplex_options(config));
    raise_for_status(sol);
    return make_toposort_index(model, lp, sol);
  }
  throw UsageError("unknown index '" + name + "' (expected greedy, gittins, cone or toposort)");
}

namespace {

struct Context {
  RunConfig config;
  std::string command;
  fs::path out_dir;
  bool quiet = false;
  bool timing = false;
  std::ostream& out;
  std::ostream& err;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("error writing " + path.string());
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_manifest(const Context& ctx) {
  ojson m;
  m["tool"] = "opbsp";
  m["version"] = "v" OPBSP_VERSION;
  m["command"] = ctx.command;
  m["seed"] = ctx.config.seed;
  m["config"] = ctx.config.to_json();
  write_json(ctx.out_dir / "manifest.json", m);
}

std::string fixed(double v) { return fmt::format("{:.6f}", v); }

StrategyRun run_strategy(const Context& ctx, const BlockModel& model, const std::string& name,
                         StrategyOptions options) {
  auto index = make_index(name, ctx.config, model);
  return run_index_strategy(model, *index, ctx.config.discount(), options);
}

int cmd_generate(Context& ctx) {
  const BlockModel model = load_run_model(ctx.config);
  write_text(ctx.out_dir / "model.json", model_to_json(model).dump() + "\n");
  if (!ctx.quiet) {
    ctx.out << fmt::format("model {}x{}x{} ({} blocks) written to {}\n", model.nx(),
                           model.ny(), model.depth(), model.num_blocks(),
                           (ctx.out_dir / "model.json").string());
  }
  return kExitOk;
}

ojson run_json(const std::string& name, const RunConfig& config, const StrategyRun& run,
               const BlockModel& model) {
  ojson j;
  j["strategy"] = name;
  j["constrained"] = config.constrained;
  j["stop"] = stop_name(config.stop);
  j["npv"] = run.npv;
  j["steps"] = run.steps.size();
  std::vector<int> columns;
  for (const auto& s : run.steps) columns.push_back(s.column);
  j["columns"] = columns;
  j["blocks"] = run.blocks(model);
  return j;
}

int cmd_sequence(Context& ctx) {
  const BlockModel model = load_run_model(ctx.config);
  const auto& cfg = ctx.config;
  const StrategyRun run =
      run_strategy(ctx, model, cfg.strategy, {cfg.constrained, cfg.stop});
  write_json(ctx.out_dir / "sequence.json", run_json(cfg.strategy, cfg, run, model));
  if (!ctx.quiet) {
    ctx.out << fmt::format("{}: {} blocks, npv {}\n", cfg.strategy, run.steps.size(),
                           fixed(run.npv));
  }
  return kExitOk;
}

int cmd_schedule(Context& ctx) {
  const BlockModel model = load_run_model(ctx.config);
  const auto& cfg = ctx.config;
  const int T = resolve_horizon(cfg, model);
  BlockSequence seq;
  if (!cfg.sequence_path.empty()) {
    seq = sequence_from_json(read_json_file(cfg.sequence_path), model.num_blocks());
  } else {
    seq.blocks = run_strategy(ctx, model, cfg.strategy, {cfg.constrained, StopRule::kExhaust})
                     .blocks(model);
  }
  const double rho = cfg.period_rate();
  Schedule schedule;
  std::vector<std::string> warnings;
  double before = 0.0;
  if (cfg.resolve) {
    schedule = resequence_and_resolve(seq, model, T, rho, cfg.capacities);
    before = schedule_npv(schedule, model, rho);
  } else {
    PackingResult packed = sequence_to_schedule(seq, model, cfg.capacities, T);
    warnings = packed.warnings;
    before = schedule_npv(packed.schedule, model, rho);
    if (cfg.clean == "none") {
      schedule = packed.schedule;
    } else if (cfg.clean == "trailing" || cfg.clean == "last_only") {
      schedule = clean_final_schedule(
          packed.schedule, model,
          cfg.clean == "trailing" ? CleanMode::kTrailing : CleanMode::kLastOnly);
    } else {
      throw UsageError("unknown clean mode '" + cfg.clean +
                       "' (expected trailing, last_only or none)");
    }
  }
  const double npv = schedule_npv(schedule, model, rho);
  const ValidationReport report =
      validate_schedule(schedule, model, derive_precedences(model), cfg.capacities);

  write_json(ctx.out_dir / "schedule.json", schedule_to_json(schedule));
  std::ostringstream pit;
  write_pit_report(pit, schedule, model, rho);
  write_text(ctx.out_dir / "pit_report.csv", pit.str());
  ojson summary;
  summary["horizon"] = T;
  summary["sequence_length"] = seq.blocks.size();
  summary["extracted"] = schedule.num_extracted();
  summary["periods_used"] = schedule.last_period();
  summary["npv_before_cleaning"] = before;
  summary["npv"] = npv;
  summary["warnings"] = warnings;
  summary["valid"] = report.ok;
  summary["violation"] = report.ok ? ojson(nullptr) : ojson(report.kind + ": " + report.message);
  write_json(ctx.out_dir / "schedule_summary.json", summary);

  for (const auto& w : warnings) ctx.err << "warning: " << w << '\n';
  if (!report.ok) {
    ctx.err << "schedule fails validation (" << report.kind << "): " << report.message << '\n';
    return kExitInfeasible;
  }
  if (!ctx.quiet) {
    ctx.out << fmt::format("{} of {} blocks scheduled over {} periods, npv {}\n",
                           schedule.num_extracted(), seq.blocks.size(),
                           schedule.last_period(), fixed(npv));
  }
  return kExitOk;
}

int cmd_bounds(Context& ctx) {
  const BlockModel model = load_run_model(ctx.config);
  const auto& cfg = ctx.config;
  const DiscountSchedule disc = cfg.discount();
  using Clock = std::chrono::steady_clock;
  const auto seconds = [](Clock::time_point a) {
    return std::chrono::duration<double>(Clock::now() - a).count();
  };

  struct Column {
    std::string label;
    std::optional<double> value;
    double time = 0.0;
  };
  std::vector<Column> columns;
  std::optional<double> best;
  double best_time = 0.0;
  for (const auto& name : cfg.indices) {
    const auto start = Clock::now();
    std::optional<double> v;
    try {
      v = run_strategy(ctx, model, name, {true, StopRule::kNonPositive}).npv;
    } catch (const BudgetExceeded& e) {
      if (!ctx.quiet) ctx.err << "note: " << name << " index skipped: " << e.what() << '\n';
    }
    columns.push_back({name, v, seconds(start)});
    if (v && (!best || *v > *best)) {
      best = v;
      best_time = columns.back().time;
    }
  }
  columns.push_back({"Best Index", best, best_time});
  auto start = Clock::now();
  std::optional<double> opt;
  try {
    DpOptions o;
    o.state_budget = cfg.dp_state_budget;
    opt = dp_solve(model, disc, o).value;
  } catch (const BudgetExceeded&) {
  }
  columns.push_back({"Optimum", opt, seconds(start)});
  start = Clock::now();
  const double ub = index_upper_bound(model, disc);
  columns.push_back({"Index UB", ub, seconds(start)});

  constexpr double kTol = 1e-9;
  const double scale = std::max(1.0, std::abs(ub));
  bool ordered = true;
  if (best && opt) ordered = ordered && *best <= *opt + kTol * scale;
  if (opt) ordered = ordered && *opt <= ub + kTol * scale;
  if (best) ordered = ordered && *best <= ub + kTol * scale;

  ojson j;
  ojson values = ojson::object();
  for (const auto& c : columns) values[c.label] = c.value ? ojson(*c.value) : ojson(nullptr);
  j["values"] = values;
  j["ordered"] = ordered;
  write_json(ctx.out_dir / "bounds.json", j);

  const std::string mine =
      cfg.model_path.empty() ? fmt::format("synthetic-{}", cfg.seed)
                             : fs::path(cfg.model_path).stem().string();
  std::string table = fmt::format("{:<16}{:<7}", "Mine", "-");
  for (const auto& c : columns) table += fmt::format("{:>16}", c.label);
  table += '\n';
  table += fmt::format("{:<16}{:<7}", mine, "Value");
  for (const auto& c : columns) table += fmt::format("{:>16}", c.value ? fixed(*c.value) : "n/a");
  table += '\n';
  if (ctx.timing) {
    table += fmt::format("{:<16}{:<7}", "", "Time");
    for (const auto& c : columns) table += fmt::format("{:>16}", fmt::format("{:.3f}s", c.time));
    table += '\n';
  }
  write_text(ctx.out_dir / "bounds.txt", table);
  if (!ctx.quiet) ctx.out << table;
  if (!ordered) {
    ctx.err << "bounds are out of order: index <= optimum <= upper bound fails\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_dp(Context& ctx) {
  const BlockModel model = load_run_model(ctx.config);
  DpOptions o;
  o.state_budget = ctx.config.dp_state_budget;
  const DpResult r = dp_solve(model, ctx.config.discount(), o);
  ojson j;
  j["value"] = r.value;
  j["states"] = r.states;
  std::vector<ojson> seq;
  for (const auto d : r.sequence) {
    seq.push_back(d.is_retire() ? ojson("retire") : ojson(d.column()));
  }
  j["sequence"] = seq;
  write_json(ctx.out_dir / "dp.json", j);
  if (!ctx.quiet) {
    ctx.out << fmt::format("optimum {} over {} states\n", fixed(r.value), r.states);
  }
  return kExitOk;
}

int cmd_lp_export(Context& ctx) {
  const BlockModel model = load_run_model(ctx.config);
  const LpModel lp = build_run_lp(ctx.config, model);
  const fs::path path = ctx.out_dir / ("model." + to_string(ctx.config.lp_format));
  export_lp(lp, path, ctx.config.lp_format);
  if (!ctx.quiet) {
    ctx.out << fmt::format("{} variables, {} rows written to {}\n", lp.num_variables(),
                           lp.num_rows(), path.string());
  }
  if (!ctx.config.solve_lp) return kExitOk;
  const LpSolution sol = solve_lp_relaxation(lp, simplex_options(ctx.config));
  write_json(ctx.out_dir / "solution.json", ojson::parse(solution_to_json(lp, sol).dump()));
  raise_for_status(sol);
  if (!ctx.quiet) ctx.out << fmt::format("LP relaxation optimum {}\n", fixed(sol.objective));
  return kExitOk;
}

int cmd_validate(Context& ctx) {
  const BlockModel model = load_run_model(ctx.config);
  const auto& cfg = ctx.config;
  if (cfg.schedule_path.empty() && cfg.sequence_path.empty()) {
    throw UsageError("validate needs --schedule and/or --sequence");
  }
  const PrecedenceArcs arcs = derive_precedences(model);
  ValidationReport report;
  if (!cfg.sequence_path.empty()) {
    const BlockSequence seq =
        sequence_from_json(read_json_file(cfg.sequence_path), model.num_blocks());
    std::vector<char> done(model.num_blocks(), 0);
    const auto preds = arcs.predecessors();
    for (std::size_t k = 0; k < seq.blocks.size() && report.ok; ++k) {
      const int b = seq.blocks[k];
      for (int p : preds[b]) {
        if (!done[p]) {
          report = {false, "precedence",
                    fmt::format("sequence position {} takes block {} before its predecessor {}",
                                k, b, p)};
          break;
        }
      }
      done[b] = 1;
    }
  }
  if (report.ok && !cfg.schedule_path.empty()) {
    std::vector<int> duplicates;
    const Schedule s = schedule_from_json_text(read_text(cfg.schedule_path), model.num_blocks(),
                                               resolve_horizon(cfg, model), &duplicates);
    if (!duplicates.empty()) {
      report = {false, "once-only",
                fmt::format("block {} is scheduled more than once", duplicates.front())};
    } else {
      report = validate_schedule(s, model, arcs, cfg.capacities);
    }
  }
  ojson j;
  j["ok"] = report.ok;
  j["kind"] = report.ok ? ojson(nullptr) : ojson(report.kind);
  j["message"] = report.ok ? ojson(nullptr) : ojson(report.message);
  write_json(ctx.out_dir / "validation.json", j);
  if (!report.ok) {
    ctx.err << "validation failed (" << report.kind << "): " << report.message << '\n';
    return kExitInfeasible;
  }
  if (!ctx.quiet) ctx.out << "valid\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Open-pit block sequencing: index strategies, bounds, DP and scheduling"};
  app.set_version_flag("--version", "opbsp v" OPBSP_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration or a previous manifest");
  auto* seed_opt = app.add_option("--seed", seed, "Seed of the synthetic model");
  app.add_option("--out-dir", out_dir, "Directory for all artifacts")->capture_default_str();
  app.add_flag("--quiet", quiet, "Only report errors");

  std::string model_path, dims, neighborhood, discount_mode;
  int slope_k = 1, horizon = 0, blocks_per_year = 1;
  double rho_year = 0.0, rho = 0.0, rho_sharp = 0.0;
  std::vector<std::string> capacity_specs;
  auto* model_opt = app.add_option("--model", model_path, "Block model (.csv or .json)");
  auto* dims_opt = app.add_option("--dims", dims, "Synthetic model size NX,NY,DEPTH");
  auto* k_opt = app.add_option("--slope-k", slope_k, "Maximum depth step between neighbours");
  auto* nb_opt = app.add_option("--neighborhood", neighborhood, "4 or 8");
  auto* horizon_opt = app.add_option("--horizon", horizon, "Number of scheduling periods");
  app.add_option("--capacity", capacity_specs,
                 "Per-period upper bound RESOURCE=VALUE (repeatable)");
  auto* mode_opt = app.add_option("--discount", discount_mode, "yearly or per_block");
  auto* rho_year_opt = app.add_option("--rho-year", rho_year, "Yearly discount factor");
  auto* bpy_opt = app.add_option("--blocks-per-year", blocks_per_year,
                                 "Extraction steps per year for yearly discounting");
  auto* rho_opt = app.add_option("--rho", rho, "Per-block discount factor");
  auto* sharp_opt = app.add_option("--rho-sharp", rho_sharp, "Discount rate of the Gittins index");

  auto add_sub = [&](const char* name, const char* desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->fallthrough();
    return sub;
  };
  auto* gen = add_sub("generate", "Write a seeded synthetic block model");
  double min_value = 0.0, max_value = 0.0, tonnage = 0.0;
  int smoothing = 0;
  auto* min_opt = gen->add_option("--min-value", min_value);
  auto* max_opt = gen->add_option("--max-value", max_value);
  auto* smooth_opt = gen->add_option("--smoothing", smoothing, "Box filter half-width");
  auto* ton_opt = gen->add_option("--tonnage", tonnage, "Tonnage of every block");

  std::string index_name, stop, cone_score, lp_budget_text;
  bool unconstrained = false;
  std::size_t lp_budget = 0;
  auto* seq_cmd = add_sub("sequence", "Run an index strategy and write the block sequence");
  std::vector<CLI::Option*> index_opts;
  std::vector<CLI::Option*> lp_budget_opts;
  index_opts.push_back(seq_cmd->add_option("--index", index_name,
                                           "greedy, gittins, cone or toposort"));
  auto* unc_opt = seq_cmd->add_flag("--unconstrained", unconstrained,
                                    "Ignore the slope rule when picking columns");
  auto* stop_opt = seq_cmd->add_option("--stop", stop, "exhaust or nonpositive (default)");
  auto* score_opt = seq_cmd->add_option("--cone-score", cone_score, "per_block or raw_sum");
  lp_budget_opts.push_back(
      seq_cmd->add_option("--lp-budget", lp_budget, "Variable budget of the bundled LP solver"));

  std::string sequence_path, clean;
  bool resolve = false;
  auto* sched_cmd = add_sub("schedule", "Turn a block sequence into a capacity-feasible schedule");
  std::vector<CLI::Option*> sequence_opts;
  sequence_opts.push_back(sched_cmd->add_option("--sequence", sequence_path,
                                                "Sequence JSON (default: run --index)"));
  index_opts.push_back(sched_cmd->add_option("--index", index_name, "Strategy to sequence with"));
  auto* clean_opt = sched_cmd->add_option("--clean", clean, "trailing, last_only or none");
  auto* resolve_opt =
      sched_cmd->add_flag("--resolve", resolve, "Solve the chain-precedence instance exactly");
  lp_budget_opts.push_back(sched_cmd->add_option("--lp-budget", lp_budget));

  std::string indices;
  bool timing = false;
  auto* bounds_cmd = add_sub("bounds", "Index NPVs, the optimum and the Gittins upper bound");
  auto* indices_opt = bounds_cmd->add_option("--indices", indices, "Comma-separated index names");
  bounds_cmd->add_flag("--timing", timing, "Add a Time row to the table");
  auto* bounds_score_opt = bounds_cmd->add_option("--cone-score", cone_score);
  lp_budget_opts.push_back(bounds_cmd->add_option("--lp-budget", lp_budget));

  std::size_t state_budget = 0;
  auto* dp_cmd = add_sub("dp", "Exact dynamic programme over mine profiles");
  std::vector<CLI::Option*> state_opts;
  state_opts.push_back(dp_cmd->add_option("--state-budget", state_budget));
  state_opts.push_back(bounds_cmd->add_option("--state-budget", state_budget));

  std::string format;
  bool solve = false;
  auto* lp_cmd = add_sub("lp-export", "Write the scheduling ILP in LP or MPS format");
  auto* format_opt = lp_cmd->add_option("--format", format, "lp or mps");
  auto* solve_opt = lp_cmd->add_flag("--solve", solve, "Also solve the LP relaxation");
  lp_budget_opts.push_back(lp_cmd->add_option("--lp-budget", lp_budget));

  std::string schedule_path;
  auto* val_cmd = add_sub("validate", "Check a schedule and/or a block sequence");
  auto* schedule_opt = val_cmd->add_option("--schedule", schedule_path, "Schedule JSON");
  sequence_opts.push_back(val_cmd->add_option("--sequence", sequence_path, "Sequence JSON"));

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto given = [](const CLI::Option* o) { return o->count() > 0; };
  const auto any_given = [&](const std::vector<CLI::Option*>& opts) {
    for (const auto* o : opts) {
      if (given(o)) return true;
    }
    return false;
  };
  const auto started = std::chrono::steady_clock::now();
  std::string command;
  try {
    RunConfig cfg;
    bool stop_in_config = false;
    if (!config_path.empty()) {
      const auto j = read_json_file(config_path);
      const auto& body =
          j.is_object() && j.contains("config") && j.at("config").is_object() ? j.at("config") : j;
      stop_in_config = body.is_object() && body.contains("stop");
      cfg.apply_json(j);
    }
    if (given(seed_opt)) cfg.seed = seed;
    if (given(model_opt)) cfg.model_path = model_path;
    if (given(dims_opt)) {
      cfg.dims = parse_dims(dims);
      cfg.model_path.clear();
    }
    if (given(k_opt)) cfg.slope_k = slope_k;
    if (given(nb_opt)) cfg.neighborhood = neighborhood_from_string(neighborhood);
    if (given(horizon_opt)) cfg.horizon = horizon;
    for (const auto& spec : capacity_specs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw UsageError("capacity must look like RESOURCE=VALUE");
      double v = 0.0;
      try {
        v = std::stod(spec.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("bad capacity value in '" + spec + "'");
      }
      const std::string res = spec.substr(0, eq);
      auto& limits = cfg.capacities.limits;
      const auto it = std::find_if(limits.begin(), limits.end(),
                                   [&](const ResourceLimit& l) { return l.resource == res; });
      if (it == limits.end()) {
        limits.push_back({res, {v}, {}});
      } else {
        it->upper = {v};
      }
    }
    if (given(mode_opt)) cfg.discount_mode = discount_mode;
    if (given(rho_year_opt)) cfg.rho_year = rho_year;
    if (given(bpy_opt)) cfg.blocks_per_year = blocks_per_year;
    if (given(rho_opt)) cfg.rho = rho;
    if (given(sharp_opt)) cfg.rho_sharp = rho_sharp;
    if (given(min_opt)) cfg.synthetic.min_value = min_value;
    if (given(max_opt)) cfg.synthetic.max_value = max_value;
    if (given(smooth_opt)) cfg.synthetic.smoothing_radius = smoothing;
    if (given(ton_opt)) cfg.synthetic.tonnage = tonnage;
    if (any_given(index_opts)) cfg.strategy = index_name;
    if (given(unc_opt)) cfg.constrained = !unconstrained;
    if (given(stop_opt)) {
      cfg.stop = stop_from_string(stop);
    } else if (seq_cmd->parsed() && !stop_in_config) {
      // A standalone sequence retires once nothing pays any more.
      cfg.stop = StopRule::kNonPositive;
    }
    if (given(score_opt) || given(bounds_score_opt)) cfg.cone_score = score_from_string(cone_score);
    if (any_given(lp_budget_opts)) cfg.lp_max_variables = lp_budget;
    if (any_given(sequence_opts)) cfg.sequence_path = sequence_path;
    if (given(clean_opt)) cfg.clean = clean;
    if (given(resolve_opt)) cfg.resolve = resolve;
    if (given(indices_opt)) cfg.indices = split_list(indices);
    if (any_given(state_opts)) cfg.dp_state_budget = state_budget;
    if (given(format_opt)) cfg.lp_format = lp_format_from_string(format);
    if (given(solve_opt)) cfg.solve_lp = solve;
    if (given(schedule_opt)) cfg.schedule_path = schedule_path;

    const auto subs = app.get_subcommands();
    command = subs.front()->get_name();
    Context ctx{cfg, command, fs::path(out_dir), quiet, timing, out, err};
    fs::create_directories(ctx.out_dir);
    write_manifest(ctx);

    int code = kExitOk;
    if (command == "generate") {
      code = cmd_generate(ctx);
    } else if (command == "sequence") {
      code = cmd_sequence(ctx);
    } else if (command == "schedule") {
      code = cmd_schedule(ctx);
    } else if (command == "bounds") {
      code = cmd_bounds(ctx);
    } else if (command == "dp") {
      code = cmd_dp(ctx);
    } else if (command == "lp-export") {
      code = cmd_lp_export(ctx);
    } else {
      code = cmd_validate(ctx);
    }
    ojson t;
    t["command"] = command;
    t["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_json(ctx.out_dir / "timing.json", t);
    return code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InadmissibleDecision& e) {
    err << "inadmissible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace opbsp
