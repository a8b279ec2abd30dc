#pragma once

// Small fixtures shared by the unit tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pointnav/gridworld.hpp"

namespace testing {

using namespace pointnav;

// Closed rectangle of free cells, one-cell walls all round.
inline OccupancyGrid open_room(int width, int height, double cell_size) {
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * height, 0);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      if (i == 0 || j == 0 || i == width - 1 || j == height - 1) {
        cells[static_cast<std::size_t>(j) * width + i] = 1;
      }
    }
  }
  return OccupancyGrid(width, height, cell_size, std::move(cells));
}

// Rows top first, as in the map file format.
inline OccupancyGrid from_rows(const std::vector<std::string>& rows, double cell_size) {
  std::string text = "cellsize " + std::to_string(cell_size) + "\n";
  for (const std::string& r : rows) text += r + "\n";
  return load_map(text);
}

// Multi-room test map with pillars, the same generator the tools use.
inline OccupancyGrid cluttered_map(std::uint64_t seed) {
  MapSpec spec;
  spec.width = 200;
  spec.height = 150;
  spec.cell_size = 0.1;
  spec.room_count = 6;
  spec.clutter = 8;
  spec.seed = seed;
  return generate_map(spec);
}

class Rand {
 public:
  explicit Rand(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  Pose pose(double extent = 10.0) {
    return {uniform(-extent, extent), uniform(-extent, extent), uniform(-kPi, kPi)};
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Random navigable pose (cell centre, random heading).
inline Pose random_free_pose(const OccupancyGrid& grid, Rand& rng, double radius) {
  for (;;) {
    const CellIndex c{rng.integer(1, grid.width() - 2), rng.integer(1, grid.height() - 2)};
    const Vec2 p = grid.cell_center(c);
    if (is_navigable(grid, p, radius)) return {p.x, p.y, rng.uniform(-kPi, kPi)};
  }
}

}  // namespace testing
