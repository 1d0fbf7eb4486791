#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mavi/simworld/world.hpp"

namespace mavi::simworld {

struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct MapUpdateParams {
  double log_odds_free = -0.4;
  double log_odds_hit = 0.85;
  double log_odds_min = -10.0;
  double log_odds_max = 10.0;
};

/// Log-odds occupancy grid. Cells are row-major with y increasing by row.
class OccupancyGrid {
 public:
  OccupancyGrid(double resolution_m, Vec2 origin, int width, int height, MapUpdateParams params = {});

  double resolution() const { return resolution_; }
  Vec2 origin() const { return origin_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const MapUpdateParams& params() const { return params_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t index) const {
    return {static_cast<int>(index % width_), static_cast<int>(index / width_)};
  }
  /// Cell containing a world point (may be out of bounds).
  Cell cell_of(Vec2 p) const;
  Vec2 center_of(Cell c) const;

  double log_odds(Cell c) const { return cells_.at(index(c)); }
  const std::vector<double>& cells() const { return cells_; }
  /// Adds delta, clamped to the configured range, and marks the cell dirty.
  void add(Cell c, double delta);
  void set(Cell c, double value);

  /// Indices changed since the last call, ascending.
  std::vector<std::size_t> take_dirty();

 private:
  double resolution_;
  Vec2 origin_;
  int width_;
  int height_;
  MapUpdateParams params_;
  std::vector<double> cells_;
  std::vector<std::uint8_t> dirty_flag_;
  std::vector<std::size_t> dirty_;
};

/// Cells crossed by the segment from a to b in traversal order, clipped to the grid.
std::vector<Cell> traverse(const OccupancyGrid& grid, Vec2 a, Vec2 b);

/// Integrates one scan taken at pose. Throws InvalidArgument if pose is off-grid.
void update_map(OccupancyGrid& grid, const Pose2D& pose, const Scan& scan);

/// Binary PGM (P5) image, top row = highest y. Occupied 0, free 254, unknown 205.
std::string to_pgm(const OccupancyGrid& grid);
/// Plain-text sidecar (image, resolution, origin, thresholds, size).
std::string map_sidecar(const OccupancyGrid& grid, const std::string& image_name);
/// Writes <prefix>.pgm and <prefix>.yaml.
void export_map(const OccupancyGrid& grid, const std::string& prefix);

inline constexpr double kOccupiedProbability = 0.65;
inline constexpr double kFreeProbability = 0.196;
std::uint8_t pgm_value(double log_odds);

// ---------------------------------------------------------------- planning

class PlanError : public std::runtime_error {
 public:
  enum class Kind { NoPath, StartOrGoalOccupied };
  PlanError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct PlannedPath {
  std::vector<Cell> cells;
  std::vector<Vec2> waypoints;
  double cost = 0.0;
};

/// Free iff log-odds < threshold.
bool is_free(const OccupancyGrid& grid, Cell c, double occupied_threshold);

/// A* over 8-connected free cells, unit straight and sqrt(2) diagonal cost, with
/// diagonal moves disallowed when either flanking orthogonal cell is blocked.
PlannedPath plan_path(const OccupancyGrid& grid, Cell start, Cell goal, double occupied_threshold);

/// Copy of the grid with every cell within radius of a blocked cell set to the maximum.
OccupancyGrid inflate(const OccupancyGrid& grid, double radius_m, double occupied_threshold);

}  // namespace mavi::simworld
