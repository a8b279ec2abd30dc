#include "pointnav/planner.hpp"

#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>

namespace pointnav {

namespace {

constexpr int kNeighborDi[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kNeighborDj[8] = {0, 0, 1, -1, 1, -1, 1, -1};

double step_cost(int k, double cs) {
  return k < 4 ? cs : cs * std::numbers::sqrt2;
}

}  // namespace

CellIndex DistanceField::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / cell_size_)),
          static_cast<int>(std::floor((p.y - origin_.y) / cell_size_))};
}

Vec2 DistanceField::cell_center(CellIndex c) const {
  return {origin_.x + (c.i + 0.5) * cell_size_, origin_.y + (c.j + 0.5) * cell_size_};
}

DistanceField distance_field(const OccupancyGrid& grid, Vec2 goal, double radius) {
  if (!is_navigable(grid, goal, radius)) {
    throw std::invalid_argument("distance_field: goal is not navigable");
  }
  DistanceField f;
  f.width_ = grid.width();
  f.height_ = grid.height();
  f.cell_size_ = grid.cell_size();
  f.origin_ = grid.origin();
  f.goal_ = goal;
  f.radius_ = radius;
  f.goal_cell_ = grid.cell_of(goal);
  f.traversable_.assign(grid.cell_count(), 0);
  f.dist_.assign(grid.cell_count(), kUnreachable);

  for (int j = 0; j < grid.height(); ++j) {
    for (int i = 0; i < grid.width(); ++i) {
      if (!grid.occupied(i, j) &&
          is_navigable(grid, grid.cell_center({i, j}), radius)) {
        f.traversable_[grid.index(i, j)] = 1;
      }
    }
  }
  f.traversable_[f.index(f.goal_cell_)] = 1;

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  f.dist_[f.index(f.goal_cell_)] = 0.0;
  open.push({0.0, f.index(f.goal_cell_)});
  const double cs = grid.cell_size();
  while (!open.empty()) {
    const auto [d, idx] = open.top();
    open.pop();
    if (d > f.dist_[idx]) {
      continue;
    }
    const int ci = static_cast<int>(idx % f.width_);
    const int cj = static_cast<int>(idx / f.width_);
    for (int k = 0; k < 8; ++k) {
      const CellIndex n{ci + kNeighborDi[k], cj + kNeighborDj[k]};
      if (!f.traversable(n)) {
        continue;
      }
      const double nd = d + step_cost(k, cs);
      double& cur = f.dist_[f.index(n)];
      if (nd < cur) {
        cur = nd;
        open.push({nd, f.index(n)});
      }
    }
  }
  return f;
}

double geodesic_distance(const DistanceField& field, Vec2 p) {
  return field.at(field.cell_of(p));
}

std::vector<Vec2> shortest_path(const DistanceField& field, Vec2 start) {
  CellIndex c = field.cell_of(start);
  if (!std::isfinite(field.at(c))) {
    throw std::invalid_argument("shortest_path: start is unreachable");
  }
  std::vector<Vec2> path{start};
  const double cs = field.cell_size();
  while (!(c == field.goal_cell())) {
    CellIndex best = c;
    double best_total = kUnreachable;
    for (int k = 0; k < 8; ++k) {
      const CellIndex n{c.i + kNeighborDi[k], c.j + kNeighborDj[k]};
      const double dn = field.at(n);
      if (dn < field.at(c) && dn + step_cost(k, cs) < best_total) {
        best_total = dn + step_cost(k, cs);
        best = n;
      }
    }
    if (best == c) {
      throw std::logic_error("shortest_path: field has no descent direction");
    }
    c = best;
    path.push_back(field.cell_center(c));
  }
  return path;
}

double polyline_length(const std::vector<Vec2>& points) {
  double total = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    total += distance(points[k - 1], points[k]);
  }
  return total;
}

std::vector<Episode> generate_episodes(const OccupancyGrid& grid, int n,
                                       const EpisodeConstraints& constraints,
                                       RngStream& rng, const std::string& map_id,
                                       double radius) {
  if (n < 0) {
    throw std::invalid_argument("episode count must be non-negative");
  }
  std::vector<CellIndex> candidates;
  for (int j = 0; j < grid.height(); ++j) {
    for (int i = 0; i < grid.width(); ++i) {
      if (!grid.occupied(i, j) && is_navigable(grid, grid.cell_center({i, j}), radius)) {
        candidates.push_back({i, j});
      }
    }
  }
  if (candidates.empty() && n > 0) {
    throw GenerationError("map has no navigable cells; generated 0 of " +
                          std::to_string(n) + " episodes");
  }

  auto pick = [&]() {
    const auto k = std::uniform_int_distribution<std::size_t>(
        0, candidates.size() - 1)(rng.engine());
    return grid.cell_center(candidates[k]);
  };

  constexpr int kGoalAttemptsPerEpisode = 50;
  constexpr int kStartsPerGoal = 20;
  std::vector<Episode> episodes;
  episodes.reserve(static_cast<std::size_t>(n));
  int goal_attempts = 0;
  while (static_cast<int>(episodes.size()) < n) {
    if (goal_attempts++ >= kGoalAttemptsPerEpisode * n) {
      throw GenerationError("episode retry budget exhausted; generated " +
                            std::to_string(episodes.size()) + " of " +
                            std::to_string(n) + " episodes");
    }
    const Vec2 goal = pick();
    const DistanceField field = distance_field(grid, goal, radius);
    for (int s = 0; s < kStartsPerGoal; ++s) {
      const Vec2 start = pick();
      const double geo = geodesic_distance(field, start);
      const double euc = distance(start, goal);
      if (!std::isfinite(geo) || euc <= 0.0 || geo < constraints.min_geo ||
          geo > constraints.max_geo ||
          geo < constraints.min_ratio * euc * (1.0 - 1e-12)) {
        continue;
      }
      char id[32];
      std::snprintf(id, sizeof(id), "%05zu", episodes.size());
      const double heading = wrap_angle(-kPi + 2.0 * kPi * rng.uniform());
      // Octile sums and hypot can differ in the last bits on straight lines.
      episodes.push_back({map_id + "-" + id, map_id, {start.x, start.y, heading},
                          goal, std::max(geo, euc), euc});
      break;
    }
  }
  return episodes;
}

}  // namespace pointnav
