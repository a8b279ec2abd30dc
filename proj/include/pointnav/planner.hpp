#pragma once

/// \file
/// \brief Geodesic distance fields on the radius-inflated grid, shortest paths
/// and episode sampling.

#include <limits>
#include <string>
#include <vector>

#include "pointnav/geometry.hpp"
#include "pointnav/gridworld.hpp"
#include "pointnav/noise.hpp"

namespace pointnav {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Dijkstra distances (8-connected, octile costs) from every cell to the
/// goal cell, over cells whose centers are navigable for the given radius.
/// Self-contained: it copies the grid geometry it needs.
class DistanceField {
 public:
  DistanceField() = default;

  Vec2 goal() const { return goal_; }
  CellIndex goal_cell() const { return goal_cell_; }
  double radius() const { return radius_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }

  bool in_bounds(CellIndex c) const {
    return c.i >= 0 && c.j >= 0 && c.i < width_ && c.j < height_;
  }
  /// kUnreachable outside the grid or for cells not connected to the goal.
  double at(CellIndex c) const {
    return in_bounds(c) ? dist_[index(c)] : kUnreachable;
  }
  bool traversable(CellIndex c) const {
    return in_bounds(c) && traversable_[index(c)] != 0;
  }
  CellIndex cell_of(Vec2 p) const;
  Vec2 cell_center(CellIndex c) const;

 private:
  friend DistanceField distance_field(const OccupancyGrid&, Vec2, double);

  std::size_t index(CellIndex c) const {
    return static_cast<std::size_t>(c.j) * width_ + static_cast<std::size_t>(c.i);
  }

  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 1.0;
  Vec2 origin_;
  Vec2 goal_;
  CellIndex goal_cell_;
  double radius_ = 0.0;
  std::vector<std::uint8_t> traversable_;
  std::vector<double> dist_;
};

/// Throws std::invalid_argument if the goal is not navigable at `radius`.
DistanceField distance_field(const OccupancyGrid& grid, Vec2 goal, double radius);

/// Field value of p's cell (nearest-cell lookup).
double geodesic_distance(const DistanceField& field, Vec2 p);

/// Descent along the field from `start` to the goal cell. The first vertex
/// is `start` itself, the rest are cell centers with strictly decreasing
/// field values. Throws std::invalid_argument if start is unreachable.
std::vector<Vec2> shortest_path(const DistanceField& field, Vec2 start);

double polyline_length(const std::vector<Vec2>& points);

struct Episode {
  std::string id;
  std::string map_id;
  Pose start;
  Vec2 goal;
  double geodesic_start = 0.0;
  double euclidean_start = 0.0;
  friend bool operator==(const Episode&, const Episode&) = default;
};

struct EpisodeConstraints {
  double min_geo = 1.5;
  double max_geo = 15.0;
  double min_ratio = 1.0;  ///< geodesic / euclidean lower bound
};

/// Samples `n` episodes with start and goal at navigable cell centers and a
/// uniform start heading. Throws GenerationError when the retry budget runs
/// out, reporting how many episodes were found.
std::vector<Episode> generate_episodes(const OccupancyGrid& grid, int n,
                                       const EpisodeConstraints& constraints,
                                       RngStream& rng, const std::string& map_id,
                                       double radius = kDefaultAgentRadius);

}  // namespace pointnav
