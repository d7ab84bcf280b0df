#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace opbsp {

// Adjacency between columns on the 2-D surface grid. On a single row (or
// single column) of the grid both conventions reduce to the two lateral
// neighbours.
enum class Neighborhood { kFour, kEight };

std::string to_string(Neighborhood nb);
Neighborhood neighborhood_from_string(const std::string& text);

struct Dims {
  int nx = 0;
  int ny = 0;
  int depth = 0;
};

// Blocks are addressed by (depth, column) with depth in [1, D] counted from
// the surface and column = iy * nx + ix. The flat block index is
// column * D + (depth - 1), i.e. column-major, depth-minor.
struct BlockCoord {
  int depth = 0;
  int column = 0;
  friend bool operator==(const BlockCoord&, const BlockCoord&) = default;
};

class BlockModel {
 public:
  BlockModel() = default;
  // `resource_use` is block-major: resource_use[block * R + r].
  BlockModel(Dims dims, std::vector<double> values,
             std::vector<std::string> resource_names,
             std::vector<double> resource_use, int slope_k = 1,
             Neighborhood neighborhood = Neighborhood::kFour);

  Dims dims() const { return dims_; }
  int nx() const { return dims_.nx; }
  int ny() const { return dims_.ny; }
  int depth() const { return dims_.depth; }
  int num_columns() const { return dims_.nx * dims_.ny; }
  int num_blocks() const { return num_columns() * dims_.depth; }
  int num_resources() const { return static_cast<int>(resource_names_.size()); }
  int slope_k() const { return slope_k_; }
  Neighborhood neighborhood() const { return neighborhood_; }

  int block_index(int depth, int column) const {
    return column * dims_.depth + (depth - 1);
  }
  BlockCoord coord(int block) const {
    return {block % dims_.depth + 1, block / dims_.depth};
  }
  std::pair<int, int> column_position(int column) const {
    return {column % dims_.nx, column / dims_.nx};
  }

  // w(d, c); zero below the mine (d > D).
  double value(int depth, int column) const {
    return depth > dims_.depth ? 0.0 : values_[block_index(depth, column)];
  }
  double block_value(int block) const { return values_[block]; }
  std::span<const double> values() const { return values_; }
  std::span<const double> column_values(int column) const {
    return std::span<const double>(values_).subspan(
        static_cast<std::size_t>(column) * dims_.depth, dims_.depth);
  }

  const std::vector<std::string>& resource_names() const {
    return resource_names_;
  }
  int resource_index(const std::string& name) const;  // -1 if absent
  double resource_use(int block, int resource) const {
    return resource_use_[static_cast<std::size_t>(block) * num_resources() +
                         resource];
  }
  std::span<const double> resource_use() const { return resource_use_; }

  // M(c), sorted ascending.
  std::span<const int> neighbors(int column) const { return neighbors_[column]; }

 private:
  void build_neighbors();

  Dims dims_;
  std::vector<double> values_;
  std::vector<std::string> resource_names_;
  std::vector<double> resource_use_;
  int slope_k_ = 1;
  Neighborhood neighborhood_ = Neighborhood::kFour;
  std::vector<std::vector<int>> neighbors_;
};

// Arc (successor, predecessor): the predecessor must be extracted no later
// than the successor.
struct PrecedenceArcs {
  std::vector<std::pair<int, int>> arcs;
  int num_blocks = 0;

  // predecessors[i] lists j for every arc (i, j).
  std::vector<std::vector<int>> predecessors() const;
  bool is_acyclic() const;
};

// Minimal arc set encoding |x_c - x_c'| <= k: (d, c) -> (d-1, c) and
// (d, c) -> (d-k, c') for every c' in M(c) with d - k >= 1.
PrecedenceArcs derive_precedences(const BlockModel& model);

// How a block value is computed from CSV columns: either a direct column or
// sum_g price_g * grade_g * tonnage - cost_per_ton * tonnage - cost_per_block.
struct ValueExpr {
  std::string column = "value";
  std::map<std::string, double> grade_prices;
  double cost_per_ton = 0.0;
  double cost_per_block = 0.0;
};

struct LoadConfig {
  std::string x_column = "x";
  std::string y_column = "y";
  std::string z_column = "z";
  bool z_up = true;  // larger z is closer to the surface
  ValueExpr value;
  std::string density_column = "density";
  double block_volume = 1.0;
  // CSV column names; "tonnage" is computed as density * block_volume when
  // the file has no such column. Empty means {"tonnage"} if the file has a
  // tonnage or density column, no resources otherwise.
  std::vector<std::string> resources;
  int slope_k = 1;
  Neighborhood neighborhood = Neighborhood::kFour;

  static LoadConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

BlockModel load_block_model(const std::filesystem::path& path,
                            const LoadConfig& config);
BlockModel parse_block_model_csv(std::istream& in, const LoadConfig& config);

struct SyntheticConfig {
  double min_value = -1.0;
  double max_value = 1.0;
  int smoothing_radius = 0;  // box filter half-width, in blocks
  double tonnage = 1.0;      // per block; exported as resource "tonnage"
  int slope_k = 1;
  Neighborhood neighborhood = Neighborhood::kFour;

  static SyntheticConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

BlockModel generate_synthetic(std::uint64_t seed, Dims dims,
                              const SyntheticConfig& config = {});

nlohmann::json model_to_json(const BlockModel& model);
BlockModel model_from_json(const nlohmann::json& j);

// Dispatches on extension: .json is a serialized model, anything else CSV.
BlockModel read_model_file(const std::filesystem::path& path,
                           const LoadConfig& config);

}  // namespace opbsp
