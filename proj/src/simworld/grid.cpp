#include "mavi/simworld/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

namespace mavi::simworld {

OccupancyGrid::OccupancyGrid(double resolution_m, Vec2 origin, int width, int height,
                             MapUpdateParams params)
    : resolution_(resolution_m), origin_(origin), width_(width), height_(height), params_(params) {
  if (!(resolution_m > 0.0)) throw InvalidArgument("grid resolution must be > 0");
  if (width <= 0 || height <= 0) throw InvalidArgument("grid dimensions must be > 0");
  if (!(params.log_odds_min < 0.0 && params.log_odds_max > 0.0))
    throw InvalidArgument("grid log-odds bounds must straddle 0");
  cells_.assign(static_cast<std::size_t>(width) * height, 0.0);
  dirty_flag_.assign(cells_.size(), 0);
}

Cell OccupancyGrid::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
          static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
}

Vec2 OccupancyGrid::center_of(Cell c) const {
  return {origin_.x + (c.x + 0.5) * resolution_, origin_.y + (c.y + 0.5) * resolution_};
}

void OccupancyGrid::set(Cell c, double value) {
  const std::size_t i = index(c);
  cells_.at(i) = std::clamp(value, params_.log_odds_min, params_.log_odds_max);
  if (!dirty_flag_[i]) {
    dirty_flag_[i] = 1;
    dirty_.push_back(i);
  }
}

void OccupancyGrid::add(Cell c, double delta) { set(c, cells_.at(index(c)) + delta); }

std::vector<std::size_t> OccupancyGrid::take_dirty() {
  std::vector<std::size_t> out = std::move(dirty_);
  dirty_.clear();
  for (auto i : out) dirty_flag_[i] = 0;
  std::sort(out.begin(), out.end());
  return out;
}

// Amanatides-Woo voxel walk in grid units.
std::vector<Cell> traverse(const OccupancyGrid& grid, Vec2 a, Vec2 b) {
  std::vector<Cell> out;
  const double res = grid.resolution();
  const double ax = (a.x - grid.origin().x) / res;
  const double ay = (a.y - grid.origin().y) / res;
  const double bx = (b.x - grid.origin().x) / res;
  const double by = (b.y - grid.origin().y) / res;
  Cell c{static_cast<int>(std::floor(ax)), static_cast<int>(std::floor(ay))};
  const Cell end{static_cast<int>(std::floor(bx)), static_cast<int>(std::floor(by))};
  const double dx = bx - ax;
  const double dy = by - ay;
  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double tdx = sx != 0 ? std::abs(1.0 / dx) : inf;
  const double tdy = sy != 0 ? std::abs(1.0 / dy) : inf;
  double tx = sx > 0 ? (std::floor(ax) + 1.0 - ax) * tdx : (sx < 0 ? (ax - std::floor(ax)) * tdx : inf);
  double ty = sy > 0 ? (std::floor(ay) + 1.0 - ay) * tdy : (sy < 0 ? (ay - std::floor(ay)) * tdy : inf);
  const std::size_t max_steps = static_cast<std::size_t>(std::abs(end.x - c.x) + std::abs(end.y - c.y)) + 1;
  for (std::size_t n = 0; n < max_steps; ++n) {
    if (!grid.in_bounds(c)) break;
    out.push_back(c);
    if (c == end) break;
    if (tx < ty) {
      c.x += sx;
      tx += tdx;
    } else {
      c.y += sy;
      ty += tdy;
    }
  }
  return out;
}

void update_map(OccupancyGrid& grid, const Pose2D& pose, const Scan& scan) {
  const Vec2 origin{pose.x_m, pose.y_m};
  if (!grid.in_bounds(grid.cell_of(origin))) throw InvalidArgument("update_map: pose is outside the grid");
  const auto& p = grid.params();
  for (std::size_t i = 0; i < scan.ranges_m.size(); ++i) {
    const double angle = pose.heading_rad + scan.angle_min + scan.angle_increment * static_cast<double>(i);
    const double r = scan.ranges_m[i];
    const bool hit = std::isfinite(r);
    const double reach = hit ? r : scan.range_max;
    const Vec2 end{origin.x + reach * std::cos(angle), origin.y + reach * std::sin(angle)};
    const auto cells = traverse(grid, origin, end);
    const Cell end_cell = grid.cell_of(end);
    for (const Cell& c : cells) {
      if (hit && c == end_cell) continue;
      grid.add(c, p.log_odds_free);
    }
    if (hit && grid.in_bounds(end_cell)) grid.add(end_cell, p.log_odds_hit);
  }
}

std::uint8_t pgm_value(double log_odds) {
  const double prob = 1.0 / (1.0 + std::exp(-log_odds));
  if (prob >= kOccupiedProbability) return 0;
  if (prob <= kFreeProbability) return 254;
  return 205;
}

std::string to_pgm(const OccupancyGrid& grid) {
  std::string out = "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n255\n";
  out.reserve(out.size() + grid.cells().size());
  for (int y = grid.height() - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width(); ++x) out.push_back(static_cast<char>(pgm_value(grid.log_odds({x, y}))));
  }
  return out;
}

std::string map_sidecar(const OccupancyGrid& grid, const std::string& image_name) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "image: %s\nresolution: %.9g\norigin: [%.9g, %.9g, 0.0]\nnegate: 0\n"
                "occupied_thresh: %.9g\nfree_thresh: %.9g\nwidth: %d\nheight: %d\n",
                image_name.c_str(), grid.resolution(), grid.origin().x, grid.origin().y,
                kOccupiedProbability, kFreeProbability, grid.width(), grid.height());
  return buf;
}

void export_map(const OccupancyGrid& grid, const std::string& prefix) {
  const std::string image = prefix + ".pgm";
  std::ofstream pgm(image, std::ios::binary);
  if (!pgm) throw std::runtime_error("cannot write " + image);
  pgm << to_pgm(grid);
  std::ofstream yaml(prefix + ".yaml");
  if (!yaml) throw std::runtime_error("cannot write " + prefix + ".yaml");
  const auto slash = image.find_last_of('/');
  yaml << map_sidecar(grid, slash == std::string::npos ? image : image.substr(slash + 1));
}

// ---------------------------------------------------------------- planning

bool is_free(const OccupancyGrid& grid, Cell c, double occupied_threshold) {
  return grid.in_bounds(c) && grid.log_odds(c) < occupied_threshold;
}

PlannedPath plan_path(const OccupancyGrid& grid, Cell start, Cell goal, double threshold) {
  if (!grid.in_bounds(start) || !grid.in_bounds(goal))
    throw InvalidArgument("plan_path: start or goal outside the grid");
  if (!is_free(grid, start, threshold) || !is_free(grid, goal, threshold))
    throw PlanError(PlanError::Kind::StartOrGoalOccupied, "start or goal cell is occupied");

  constexpr double kDiag = std::numbers::sqrt2;
  const auto octile = [&](Cell c) {
    const double dx = std::abs(c.x - goal.x);
    const double dy = std::abs(c.y - goal.y);
    return std::max(dx, dy) + (kDiag - 1.0) * std::min(dx, dy);
  };

  const std::size_t n = grid.cells().size();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);

  struct Entry {
    double f;
    double h;
    std::uint64_t order;
    std::size_t index;
  };
  // Lowest f, then lowest h, then FIFO.
  const auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.order > b.order;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::uint64_t order = 0;
  const std::size_t s = grid.index(start);
  const std::size_t t = grid.index(goal);
  g[s] = 0.0;
  open.push({octile(start), octile(start), order++, s});

  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (closed[e.index]) continue;
    closed[e.index] = 1;
    if (e.index == t) break;
    const Cell c = grid.cell_at(e.index);
    for (int k = 0; k < 8; ++k) {
      const Cell nb{c.x + kDx[k], c.y + kDy[k]};
      if (!is_free(grid, nb, threshold)) continue;
      const bool diagonal = k >= 4;
      if (diagonal && (!is_free(grid, {c.x + kDx[k], c.y}, threshold) ||
                       !is_free(grid, {c.x, c.y + kDy[k]}, threshold)))
        continue;
      const std::size_t ni = grid.index(nb);
      if (closed[ni]) continue;
      const double candidate = g[e.index] + (diagonal ? kDiag : 1.0);
      if (candidate < g[ni]) {
        g[ni] = candidate;
        parent[ni] = static_cast<std::int64_t>(e.index);
        const double h = octile(nb);
        open.push({candidate + h, h, order++, ni});
      }
    }
  }
  if (!closed[t]) throw PlanError(PlanError::Kind::NoPath, "no path to goal");

  PlannedPath path;
  path.cost = g[t];
  for (std::int64_t i = static_cast<std::int64_t>(t); i >= 0; i = parent[i]) {
    path.cells.push_back(grid.cell_at(static_cast<std::size_t>(i)));
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (const Cell& c : path.cells) path.waypoints.push_back(grid.center_of(c));
  return path;
}

OccupancyGrid inflate(const OccupancyGrid& grid, double radius_m, double threshold) {
  OccupancyGrid out = grid;
  const int r = static_cast<int>(std::ceil(radius_m / grid.resolution()));
  const double r2 = (radius_m / grid.resolution()) * (radius_m / grid.resolution());
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (grid.log_odds({x, y}) < threshold) continue;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const Cell c{x + dx, y + dy};
          if (dx * dx + dy * dy <= r2 && out.in_bounds(c)) out.set(c, grid.params().log_odds_max);
        }
      }
    }
  }
  out.take_dirty();
  return out;
}

}  // namespace mavi::simworld
