#include "opbsp/block_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "opbsp/error.hpp"

namespace opbsp {

std::string to_string(Neighborhood nb) {
  return nb == Neighborhood::kFour ? "4" : "8";
}

Neighborhood neighborhood_from_string(const std::string& text) {
  if (text == "4" || text == "von_neumann") return Neighborhood::kFour;
  if (text == "8" || text == "moore") return Neighborhood::kEight;
  throw UsageError("unknown neighborhood '" + text + "' (expected 4 or 8)");
}

BlockModel::BlockModel(Dims dims, std::vector<double> values,
                       std::vector<std::string> resource_names,
                       std::vector<double> resource_use, int slope_k,
                       Neighborhood neighborhood)
    : dims_(dims),
      values_(std::move(values)),
      resource_names_(std::move(resource_names)),
      resource_use_(std::move(resource_use)),
      slope_k_(slope_k),
      neighborhood_(neighborhood) {
  if (dims_.nx < 1 || dims_.ny < 1 || dims_.depth < 0) {
    throw ModelError("block model needs nx, ny >= 1 and depth >= 0");
  }
  if (slope_k_ < 1) throw ModelError("slope_k must be >= 1");
  if (values_.size() != static_cast<std::size_t>(num_blocks())) {
    throw ModelError("value array has " + std::to_string(values_.size()) +
                     " entries, expected " + std::to_string(num_blocks()));
  }
  if (resource_use_.size() !=
      static_cast<std::size_t>(num_blocks()) * resource_names_.size()) {
    throw ModelError("resource array size does not match blocks x resources");
  }
  for (std::size_t i = 0; i < resource_use_.size(); ++i) {
    const double a = resource_use_[i];
    if (!std::isfinite(a) || a < 0.0) {
      const int block = static_cast<int>(i / resource_names_.size());
      const auto bc = coord(block);
      throw ModelError("resource '" +
                       resource_names_[i % resource_names_.size()] +
                       "' of block (d=" + std::to_string(bc.depth) +
                       ", c=" + std::to_string(bc.column) +
                       ") must be finite and non-negative");
    }
  }
  for (double w : values_) {
    if (!std::isfinite(w)) throw ModelError("block values must be finite");
  }
  build_neighbors();
}

void BlockModel::build_neighbors() {
  const int n = num_columns();
  neighbors_.assign(n, {});
  const bool diagonal =
      neighborhood_ == Neighborhood::kEight && dims_.nx > 1 && dims_.ny > 1;
  for (int c = 0; c < n; ++c) {
    const auto [ix, iy] = column_position(c);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (!diagonal && dx != 0 && dy != 0) continue;
        const int jx = ix + dx;
        const int jy = iy + dy;
        if (jx < 0 || jy < 0 || jx >= dims_.nx || jy >= dims_.ny) continue;
        neighbors_[c].push_back(jy * dims_.nx + jx);
      }
    }
    std::sort(neighbors_[c].begin(), neighbors_[c].end());
  }
}

int BlockModel::resource_index(const std::string& name) const {
  const auto it =
      std::find(resource_names_.begin(), resource_names_.end(), name);
  return it == resource_names_.end()
             ? -1
             : static_cast<int>(it - resource_names_.begin());
}

std::vector<std::vector<int>> PrecedenceArcs::predecessors() const {
  std::vector<std::vector<int>> preds(num_blocks);
  for (const auto& [succ, pred] : arcs) preds[succ].push_back(pred);
  return preds;
}

bool PrecedenceArcs::is_acyclic() const {
  // Kahn's algorithm on the predecessor -> successor orientation.
  std::vector<int> indegree(num_blocks, 0);
  std::vector<std::vector<int>> succs(num_blocks);
  for (const auto& [succ, pred] : arcs) {
    succs[pred].push_back(succ);
    ++indegree[succ];
  }
  std::vector<int> ready;
  for (int i = 0; i < num_blocks; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  int seen = 0;
  while (!ready.empty()) {
    const int i = ready.back();
    ready.pop_back();
    ++seen;
    for (int s : succs[i]) {
      if (--indegree[s] == 0) ready.push_back(s);
    }
  }
  return seen == num_blocks;
}

PrecedenceArcs derive_precedences(const BlockModel& model) {
  PrecedenceArcs result;
  result.num_blocks = model.num_blocks();
  const int k = model.slope_k();
  for (int c = 0; c < model.num_columns(); ++c) {
    for (int d = 1; d <= model.depth(); ++d) {
      const int block = model.block_index(d, c);
      if (d >= 2) result.arcs.emplace_back(block, model.block_index(d - 1, c));
      if (d - k < 1) continue;
      for (int nb : model.neighbors(c)) {
        result.arcs.emplace_back(block, model.block_index(d - k, nb));
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Configuration

LoadConfig LoadConfig::from_json(const nlohmann::json& j) {
  LoadConfig cfg;
  if (j.contains("coordinates")) {
    const auto& co = j.at("coordinates");
    cfg.x_column = co.value("x", cfg.x_column);
    cfg.y_column = co.value("y", cfg.y_column);
    cfg.z_column = co.value("z", cfg.z_column);
    cfg.z_up = co.value("z_up", cfg.z_up);
  }
  if (j.contains("value_expr")) {
    const auto& ve = j.at("value_expr");
    if (ve.is_string()) {
      cfg.value.column = ve.get<std::string>();
    } else {
      cfg.value.column = ve.value("column", std::string());
      if (ve.contains("price")) {
        for (const auto& [grade, price] : ve.at("price").items()) {
          cfg.value.grade_prices[grade] = price.get<double>();
        }
      }
      cfg.value.cost_per_ton = ve.value("cost_per_ton", 0.0);
      cfg.value.cost_per_block = ve.value("cost_per_block", 0.0);
      if (cfg.value.column.empty() && cfg.value.grade_prices.empty()) {
        throw UsageError("value_expr needs either 'column' or 'price'");
      }
    }
  }
  cfg.density_column = j.value("density_column", cfg.density_column);
  cfg.block_volume = j.value("block_volume", cfg.block_volume);
  if (j.contains("resources")) {
    cfg.resources = j.at("resources").get<std::vector<std::string>>();
  }
  cfg.slope_k = j.value("slope_k", cfg.slope_k);
  if (j.contains("neighborhood")) {
    const auto& nb = j.at("neighborhood");
    cfg.neighborhood = neighborhood_from_string(
        nb.is_number() ? std::to_string(nb.get<int>()) : nb.get<std::string>());
  }
  return cfg;
}

nlohmann::json LoadConfig::to_json() const {
  nlohmann::json ve;
  if (value.grade_prices.empty()) {
    ve = value.column;
  } else {
    ve["price"] = value.grade_prices;
    ve["cost_per_ton"] = value.cost_per_ton;
    ve["cost_per_block"] = value.cost_per_block;
  }
  return {{"coordinates",
           {{"x", x_column}, {"y", y_column}, {"z", z_column}, {"z_up", z_up}}},
          {"value_expr", ve},
          {"density_column", density_column},
          {"block_volume", block_volume},
          {"resources", resources},
          {"slope_k", slope_k},
          {"neighborhood", opbsp::to_string(neighborhood)}};
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(std::string_view text, const std::string& column,
                    std::size_t line) {
  double v = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("non-numeric value '" + std::string(text) +
                         "' in column '" + column + "'",
                     line);
  }
  return v;
}

// Maps raw coordinates to lattice indices 0..n-1 using the smallest gap
// between distinct values as the block size.
struct Axis {
  double origin = 0.0;
  double spacing = 1.0;
  int count = 1;

  static Axis fit(std::vector<double> raw, const std::string& name) {
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    Axis axis;
    axis.origin = raw.front();
    if (raw.size() == 1) return axis;
    double gap = raw[1] - raw[0];
    for (std::size_t i = 2; i < raw.size(); ++i) gap = std::min(gap, raw[i] - raw[i - 1]);
    axis.spacing = gap;
    axis.count = 0;
    for (double v : raw) {
      const double pos = (v - axis.origin) / gap;
      if (std::abs(pos - std::round(pos)) > 1e-6) {
        throw ModelError(name + " coordinate " + std::to_string(v) +
                         " is not on a regular lattice");
      }
      axis.count = std::max(axis.count, static_cast<int>(std::lround(pos)) + 1);
    }
    return axis;
  }
  int index(double v) const {
    return static_cast<int>(std::lround((v - origin) / spacing));
  }
  double coordinate(int i) const { return origin + spacing * i; }
};

std::string format_coord(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

BlockModel parse_block_model_csv(std::istream& in, const LoadConfig& config) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError("block model CSV has no header");
  std::vector<std::string> header;
  for (auto f : split_csv(line)) header.emplace_back(f);
  const auto column_of = [&](const std::string& name, bool required) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw ParseError("missing required column '" + name + "'", 1);
      return -1;
    }
    return static_cast<int>(it - header.begin());
  };

  const int col_x = column_of(config.x_column, true);
  const int col_y = column_of(config.y_column, true);
  const int col_z = column_of(config.z_column, true);
  const bool composed = !config.value.grade_prices.empty();
  const int col_value = composed ? -1 : column_of(config.value.column, true);
  std::vector<std::pair<int, double>> grade_cols;
  for (const auto& [grade, price] : config.value.grade_prices) {
    grade_cols.emplace_back(column_of(grade, true), price);
  }
  const int col_density = column_of(config.density_column, false);
  const int col_tonnage = column_of("tonnage", false);
  // Without an explicit list, tonnage is the only resource when it is known.
  std::vector<std::string> resources = config.resources;
  if (resources.empty() && (col_tonnage >= 0 || col_density >= 0)) resources = {"tonnage"};
  std::vector<int> resource_cols;
  for (const auto& r : resources) {
    const int idx = column_of(r, r != "tonnage");
    if (idx < 0 && col_density < 0) {
      throw ParseError("resource 'tonnage' needs a tonnage or '" +
                           config.density_column + "' column",
                       1);
    }
    resource_cols.push_back(idx);
  }
  const bool needs_tonnage =
      composed && (config.value.cost_per_ton != 0.0 || !grade_cols.empty());
  if (needs_tonnage && col_tonnage < 0 && col_density < 0) {
    throw ParseError("composed value needs a tonnage or density column", 1);
  }

  struct Row {
    double x, y, z, value;
    std::vector<double> resources;
    std::size_t line;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    const auto num = [&](int col) {
      return parse_number(fields[col], header[col], line_no);
    };
    Row row{num(col_x), num(col_y), num(col_z), 0.0, {}, line_no};
    double tonnage = 0.0;
    if (col_tonnage >= 0) {
      tonnage = num(col_tonnage);
    } else if (col_density >= 0) {
      tonnage = num(col_density) * config.block_volume;
    }
    if (composed) {
      double v = -config.value.cost_per_ton * tonnage - config.value.cost_per_block;
      for (const auto& [col, price] : grade_cols) v += price * num(col) * tonnage;
      row.value = v;
    } else {
      row.value = num(col_value);
    }
    for (int col : resource_cols) {
      row.resources.push_back(col >= 0 ? num(col) : tonnage);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("block model CSV has no data rows");

  std::vector<double> xs, ys, zs;
  for (const auto& r : rows) {
    xs.push_back(r.x);
    ys.push_back(r.y);
    zs.push_back(r.z);
  }
  const Axis ax = Axis::fit(xs, "x");
  const Axis ay = Axis::fit(ys, "y");
  const Axis az = Axis::fit(zs, "z");
  const Dims dims{ax.count, ay.count, az.count};
  const int R = static_cast<int>(resources.size());
  const std::size_t n = static_cast<std::size_t>(dims.nx) * dims.ny * dims.depth;
  std::vector<double> values(n, 0.0);
  std::vector<double> use(n * R, 0.0);
  std::vector<std::size_t> source_line(n, 0);
  for (const auto& r : rows) {
    const int ix = ax.index(r.x);
    const int iy = ay.index(r.y);
    const int iz = az.index(r.z);
    const int d = config.z_up ? dims.depth - iz : iz + 1;
    const std::size_t block =
        static_cast<std::size_t>(iy * dims.nx + ix) * dims.depth + (d - 1);
    if (source_line[block] != 0) {
      throw ModelError("duplicate block at (x=" + format_coord(r.x) +
                       ", y=" + format_coord(r.y) + ", z=" + format_coord(r.z) +
                       ") on lines " + std::to_string(source_line[block]) +
                       " and " + std::to_string(r.line));
    }
    source_line[block] = r.line;
    values[block] = r.value;
    for (int k = 0; k < R; ++k) use[block * R + k] = r.resources[k];
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (source_line[b] != 0) continue;
    const int column = static_cast<int>(b / dims.depth);
    const int d = static_cast<int>(b % dims.depth) + 1;
    const int iz = config.z_up ? dims.depth - d : d - 1;
    throw ModelError("missing block at (x=" +
                     format_coord(ax.coordinate(column % dims.nx)) + ", y=" +
                     format_coord(ay.coordinate(column / dims.nx)) + ", z=" +
                     format_coord(az.coordinate(iz)) + ")");
  }
  return BlockModel(dims, std::move(values), std::move(resources), std::move(use),
                    config.slope_k, config.neighborhood);
}

BlockModel load_block_model(const std::filesystem::path& path,
                            const LoadConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open block model '" + path.string() + "'");
  return parse_block_model_csv(in, config);
}

// ---------------------------------------------------------------------------
// Synthetic generation

SyntheticConfig SyntheticConfig::from_json(const nlohmann::json& j) {
  SyntheticConfig cfg;
  cfg.min_value = j.value("min_value", cfg.min_value);
  cfg.max_value = j.value("max_value", cfg.max_value);
  cfg.smoothing_radius = j.value("smoothing_radius", cfg.smoothing_radius);
  cfg.tonnage = j.value("tonnage", cfg.tonnage);
  cfg.slope_k = j.value("slope_k", cfg.slope_k);
  if (j.contains("neighborhood")) {
    const auto& nb = j.at("neighborhood");
    cfg.neighborhood = neighborhood_from_string(
        nb.is_number() ? std::to_string(nb.get<int>()) : nb.get<std::string>());
  }
  return cfg;
}

nlohmann::json SyntheticConfig::to_json() const {
  return {{"min_value", min_value},
          {"max_value", max_value},
          {"smoothing_radius", smoothing_radius},
          {"tonnage", tonnage},
          {"slope_k", slope_k},
          {"neighborhood", opbsp::to_string(neighborhood)}};
}

BlockModel generate_synthetic(std::uint64_t seed, Dims dims,
                              const SyntheticConfig& config) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.depth <= 0) {
    throw ModelError("synthetic dimensions must all be positive");
  }
  if (!(config.min_value <= config.max_value)) {
    throw ModelError("synthetic value range is empty");
  }
  // mt19937_64 output is fully specified by the standard; the conversion to
  // [0, 1) is done by hand because std::uniform_real_distribution is not.
  std::mt19937_64 rng(seed);
  const auto uniform01 = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  const int nx = dims.nx, ny = dims.ny, nd = dims.depth;
  const std::size_t n = static_cast<std::size_t>(nx) * ny * nd;
  std::vector<double> raw(n);
  for (auto& v : raw) {
    v = config.min_value + (config.max_value - config.min_value) * uniform01();
  }
  std::vector<double> values = raw;
  const int r = config.smoothing_radius;
  if (r > 0) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        for (int d = 0; d < nd; ++d) {
          double sum = 0.0;
          int count = 0;
          for (int jy = std::max(0, iy - r); jy <= std::min(ny - 1, iy + r); ++jy) {
            for (int jx = std::max(0, ix - r); jx <= std::min(nx - 1, ix + r); ++jx) {
              for (int e = std::max(0, d - r); e <= std::min(nd - 1, d + r); ++e) {
                sum += raw[static_cast<std::size_t>(jy * nx + jx) * nd + e];
                ++count;
              }
            }
          }
          values[static_cast<std::size_t>(iy * nx + ix) * nd + d] = std::clamp(
              sum / count, config.min_value, config.max_value);
        }
      }
    }
  }
  std::vector<double> use(n, config.tonnage);
  return BlockModel(dims, std::move(values), {"tonnage"}, std::move(use),
                    config.slope_k, config.neighborhood);
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json model_to_json(const BlockModel& model) {
  nlohmann::json resources = nlohmann::json::array();
  for (int r = 0; r < model.num_resources(); ++r) {
    std::vector<double> use(model.num_blocks());
    for (int b = 0; b < model.num_blocks(); ++b) use[b] = model.resource_use(b, r);
    resources.push_back({{"name", model.resource_names()[r]}, {"use", use}});
  }
  return {{"format", "opbsp-block-model"},
          {"nx", model.nx()},
          {"ny", model.ny()},
          {"depth", model.depth()},
          {"slope_k", model.slope_k()},
          {"neighborhood", to_string(model.neighborhood())},
          {"order", "column-major, depth-minor"},
          {"values", std::vector<double>(model.values().begin(), model.values().end())},
          {"resources", resources}};
}

BlockModel model_from_json(const nlohmann::json& j) {
  try {
    const Dims dims{j.at("nx").get<int>(), j.at("ny").get<int>(),
                    j.at("depth").get<int>()};
    auto values = j.at("values").get<std::vector<double>>();
    std::vector<std::string> names;
    std::vector<std::vector<double>> per_resource;
    for (const auto& r : j.value("resources", nlohmann::json::array())) {
      names.push_back(r.at("name").get<std::string>());
      per_resource.push_back(r.at("use").get<std::vector<double>>());
    }
    const std::size_t n = values.size();
    std::vector<double> use(n * names.size());
    for (std::size_t r = 0; r < names.size(); ++r) {
      if (per_resource[r].size() != n) {
        throw ModelError("resource '" + names[r] + "' has wrong length");
      }
      for (std::size_t b = 0; b < n; ++b) use[b * names.size() + r] = per_resource[r][b];
    }
    const auto nb = neighborhood_from_string(j.value("neighborhood", std::string("4")));
    return BlockModel(dims, std::move(values), std::move(names), std::move(use),
                      j.value("slope_k", 1), nb);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed block model JSON: ") + e.what());
  }
}

BlockModel read_model_file(const std::filesystem::path& path,
                           const LoadConfig& config) {
  if (path.extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw Error("cannot open block model '" + path.string() + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    return model_from_json(j);
  }
  return load_block_model(path, config);
}

}  // namespace opbsp
