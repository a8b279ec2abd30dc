#pragma once

/// \file
/// \brief Occupancy-grid worlds, range scans and no-sliding motion.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pointnav/geometry.hpp"

namespace pointnav {

inline constexpr double kDefaultAgentRadius = 0.18;

/// Forward motion stops this far short of first contact.
inline constexpr double kCollisionMargin = 1e-3;

struct CellIndex {
  int i = 0;  ///< column, grows with +x
  int j = 0;  ///< row, grows with +y
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Closed 2D world. Cell (i, j) covers
/// [origin.x + i*cell_size, origin.x + (i+1)*cell_size) x (same for j, y).
class OccupancyGrid {
 public:
  /// `occupied` is row-major with row 0 at the bottom (smallest y).
  /// Throws std::invalid_argument when the grid is too small, the cell size
  /// is not positive, or a boundary cell is free.
  OccupancyGrid(int width, int height, double cell_size,
                std::vector<std::uint8_t> occupied, Vec2 origin = {});

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  Vec2 origin() const { return origin_; }

  bool in_bounds(int i, int j) const {
    return i >= 0 && j >= 0 && i < width_ && j < height_;
  }
  /// Out-of-bounds cells read as occupied.
  bool occupied(int i, int j) const {
    return !in_bounds(i, j) || cells_[index(i, j)] != 0;
  }
  bool occupied(CellIndex c) const { return occupied(c.i, c.j); }

  CellIndex cell_of(Vec2 p) const;
  Vec2 cell_center(CellIndex c) const;
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(i);
  }
  std::size_t cell_count() const { return cells_.size(); }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  int width_;
  int height_;
  double cell_size_;
  Vec2 origin_;
  std::vector<std::uint8_t> cells_;
};

class MapParseError : public std::runtime_error {
 public:
  MapParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the text map format:
///   cellsize <decimal>
///   <H rows of W characters from {'.', '#'}>, top row first.
OccupancyGrid load_map(std::string_view text);

/// Inverse of load_map. The cell size is written in shortest round-trip form.
std::string save_map(const OccupancyGrid& grid);

struct MapSpec {
  int width = 200;
  int height = 150;
  double cell_size = 0.1;
  int room_count = 6;
  int clutter = 0;  ///< number of free-standing pillars
  std::uint64_t seed = 0;
  double agent_radius = kDefaultAgentRadius;
};

/// Rooms by recursive splitting, one door per dividing wall (at least three
/// agent diameters wide), optional pillars. Throws GenerationError when the
/// requested rooms don't fit.
OccupancyGrid generate_map(const MapSpec& spec);

/// Number of 4-connected components of free cells.
int count_free_components(const OccupancyGrid& grid);

/// True iff a disc of `radius` around p touches no occupied cell (cells are
/// treated as full squares; touching at exactly `radius` is allowed).
bool is_navigable(const OccupancyGrid& grid, Vec2 p, double radius);

/// Distance to the first occupied cell along the ray, clamped to max_range.
/// Throws std::invalid_argument if the origin lies in an occupied cell.
double raycast(const OccupancyGrid& grid, Vec2 origin, double bearing,
               double max_range);

struct DepthScan {
  double fov = kPi / 2.0;
  double max_range = 10.0;
  std::vector<double> ranges;

  int n_rays() const { return static_cast<int>(ranges.size()); }
  /// Bearing of ray k in the agent frame; ray 0 is the rightmost.
  double bearing(int k) const;
  friend bool operator==(const DepthScan&, const DepthScan&) = default;
};

struct ScanGeometry {
  double fov = kPi / 2.0;
  int n_rays = 128;
  double max_range = 10.0;
};

DepthScan render_scan(const OccupancyGrid& grid, const Pose& pose,
                      const ScanGeometry& geometry);

/// Distance the disc can travel from p along unit direction `dir` before
/// touching an occupied cell; returns `limit` if nothing is hit before it.
double sweep_clearance(const OccupancyGrid& grid, Vec2 p, Vec2 dir,
                       double radius, double limit);

struct MoveResult {
  Pose pose;
  bool collided = false;
  double fraction = 1.0;  ///< realized / requested translation
};

/// Straight translation by `local_delta` (agent frame), truncated
/// kCollisionMargin short of contact. Never adds a sliding component.
MoveResult translate_with_collision(const OccupancyGrid& grid, const Pose& pose,
                                    Vec2 local_delta, double radius);

MoveResult move_with_collision(const OccupancyGrid& grid, const Pose& pose,
                               double forward, double radius);

}  // namespace pointnav
