#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "pointnav/planner.hpp"
#include "support.hpp"

using namespace pointnav;
using testing::Rand;

namespace {

constexpr double kOctileBound = 1.0824;  // worst case 1 / cos(22.5 deg)

// Textbook Dijkstra with an ordered set, written separately from the library.
std::vector<double> reference_field(const OccupancyGrid& g, Vec2 goal, double radius) {
  const int w = g.width(), h = g.height();
  std::vector<char> ok(g.cell_count(), 0);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      ok[g.index(i, j)] = !g.occupied(i, j) && is_navigable(g, g.cell_center({i, j}), radius);
    }
  }
  const CellIndex gc = g.cell_of(goal);
  ok[g.index(gc.i, gc.j)] = 1;
  std::vector<double> d(g.cell_count(), kUnreachable);
  std::set<std::pair<double, std::size_t>> open;
  d[g.index(gc.i, gc.j)] = 0.0;
  open.insert({0.0, g.index(gc.i, gc.j)});
  while (!open.empty()) {
    const auto [dist, idx] = *open.begin();
    open.erase(open.begin());
    const int ci = static_cast<int>(idx) % w, cj = static_cast<int>(idx) / w;
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const int ni = ci + di, nj = cj + dj;
        if (!g.in_bounds(ni, nj) || !ok[g.index(ni, nj)]) continue;
        const double cost = g.cell_size() * ((di != 0 && dj != 0) ? std::sqrt(2.0) : 1.0);
        const std::size_t n = g.index(ni, nj);
        if (dist + cost < d[n]) {
          open.erase({d[n], n});
          d[n] = dist + cost;
          open.insert({d[n], n});
        }
      }
    }
  }
  return d;
}

OccupancyGrid corridor(int length_cells) {
  return testing::open_room(length_cells, 7, 0.1);
}

}  // namespace

TEST_CASE("distance_field basics") {
  const OccupancyGrid g = corridor(108);
  const Vec2 goal{0.35, 0.35};
  const DistanceField f = distance_field(g, goal, 0.18);
  CHECK(f.at(f.goal_cell()) == 0.0);
  CHECK(geodesic_distance(f, goal) == 0.0);
  // Ten metres down the corridor.
  CHECK(std::abs(geodesic_distance(f, {10.35, 0.35}) - 10.0) <= 0.1);
  CHECK_THROWS_AS(distance_field(g, {0.05, 0.35}, 0.18), std::invalid_argument);
  CHECK_THROWS_AS(distance_field(g, {0.2, 0.35}, 0.18), std::invalid_argument);
}

TEST_CASE("L-shaped corridor") {
  // Horizontal leg 4 m along the bottom, vertical leg 3 m up the right side.
  std::vector<std::string> rows;
  const int w = 47, h = 37;
  for (int r = 0; r < h; ++r) {
    std::string row(w, '#');
    const int j = h - 1 - r;
    for (int i = 1; i < w - 1; ++i) {
      const bool bottom = j >= 1 && j <= 5;
      const bool right = i >= w - 6 && i <= w - 2 && j >= 1 && j <= h - 2;
      if (bottom || right) row[i] = '.';
    }
    rows.push_back(row);
  }
  const OccupancyGrid g = testing::from_rows(rows, 0.1);
  const Vec2 corner{4.35, 0.35};
  const Vec2 start{0.35, 0.35};
  const Vec2 goal{4.35, 3.35};
  const DistanceField f = distance_field(g, goal, 0.18);
  const double d = geodesic_distance(f, start);
  const double legs = distance(start, corner) + distance(corner, goal);
  CHECK(legs == doctest::Approx(7.0));
  CHECK(d >= 0.9 * legs);
  CHECK(d <= kOctileBound * legs + 0.1);
}

TEST_CASE("distance field agrees with an independent Dijkstra") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const OccupancyGrid g = testing::cluttered_map(seed);
    Rand rng(seed);
    const Pose gp = testing::random_free_pose(g, rng, 0.18);
    const DistanceField f = distance_field(g, gp.position(), 0.18);
    const std::vector<double> ref = reference_field(g, gp.position(), 0.18);
    for (int j = 0; j < g.height(); ++j) {
      for (int i = 0; i < g.width(); ++i) {
        const double a = f.at({i, j});
        const double b = ref[g.index(i, j)];
        if (std::isinf(b)) {
          REQUIRE(std::isinf(a));
        } else {
          REQUIRE(std::abs(a - b) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("field invariants") {
  const OccupancyGrid g = testing::cluttered_map(7);
  Rand rng(70);
  const Pose gp = testing::random_free_pose(g, rng, 0.18);
  const DistanceField f = distance_field(g, gp.position(), 0.18);
  const double cs = g.cell_size();
  int checked = 0;
  for (int j = 0; j < g.height(); ++j) {
    for (int i = 0; i < g.width(); ++i) {
      const double d = f.at({i, j});
      if (!std::isfinite(d)) continue;
      // Never shorter than the straight line between cell centres.
      REQUIRE(d >= distance(f.cell_center({i, j}), f.cell_center(f.goal_cell())) - 1e-9);
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const double dn = f.at({i + di, j + dj});
          if ((di == 0 && dj == 0) || !std::isfinite(dn)) continue;
          const double cost = cs * ((di != 0 && dj != 0) ? std::sqrt(2.0) : 1.0);
          REQUIRE(std::abs(d - dn) <= cost + 1e-9);
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 10000);
}

TEST_CASE("unreachable pocket") {
  const OccupancyGrid g = testing::from_rows({"###########",
                                              "#....#....#",
                                              "#....#....#",
                                              "#....#....#",
                                              "#....#....#",
                                              "###########"},
                                             0.1);
  const DistanceField f = distance_field(g, {0.25, 0.25}, 0.0);
  CHECK(std::isinf(geodesic_distance(f, {0.85, 0.25})));
  CHECK(std::isfinite(geodesic_distance(f, {0.45, 0.45})));
  CHECK_THROWS_AS(shortest_path(f, {0.85, 0.25}), std::invalid_argument);
}

TEST_CASE("shortest_path") {
  const OccupancyGrid room = testing::open_room(80, 80, 0.1);
  const Vec2 goal{1.05, 1.05};
  const DistanceField f = distance_field(room, goal, 0.18);

  const std::vector<Vec2> self = shortest_path(f, goal);
  CHECK(self.size() == 1);
  CHECK(self.front() == goal);

  const Vec2 start{6.55, 4.05};
  const std::vector<Vec2> path = shortest_path(f, start);
  const double len = polyline_length(path);
  const double euc = distance(start, goal);
  CHECK(len >= euc - 1e-9);
  CHECK(len <= kOctileBound * euc + 1e-9);
  CHECK(path.back() == f.cell_center(f.goal_cell()));

  for (std::size_t k = 1; k < path.size(); ++k) {
    CHECK(f.at(f.cell_of(path[k])) < f.at(f.cell_of(path[k - 1])));
  }
}

TEST_CASE("paths on random maps") {
  Rand rng(77);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const OccupancyGrid g = testing::cluttered_map(seed + 20);
    for (int trial = 0; trial < 10; ++trial) {
      const Pose gp = testing::random_free_pose(g, rng, 0.18);
      const DistanceField f = distance_field(g, gp.position(), 0.18);
      for (int s = 0; s < 20; ++s) {
        const Pose sp = testing::random_free_pose(g, rng, 0.18);
        const double d = geodesic_distance(f, sp.position());
        REQUIRE(std::isfinite(d));
        REQUIRE(d >= distance(sp.position(), gp.position()) - 1e-9);
        const std::vector<Vec2> path = shortest_path(f, sp.position());
        const double len = polyline_length(path);
        // Starts at a cell centre, so the polyline is the octile sum itself.
        REQUIRE(len >= d - 1e-9);
        REQUIRE(len <= 1.09 * d + 1e-9);
        REQUIRE(distance(path.back(), gp.position()) <= g.cell_size());
      }
    }
  }
}

TEST_CASE("polyline_length") {
  CHECK(polyline_length({}) == 0.0);
  CHECK(polyline_length({{1, 1}}) == 0.0);
  CHECK(polyline_length({{0, 0}, {4, 0}, {4, 1}, {0, 1}, {0, 0}}) == doctest::Approx(10.0));
}

TEST_CASE("generate_episodes") {
  const OccupancyGrid g = testing::cluttered_map(1);
  const EpisodeConstraints c{1.5, 15.0, 1.0};
  RngStream a(5, "episodes", "m1");
  const std::vector<Episode> eps = generate_episodes(g, 100, c, a, "m1");
  REQUIRE(eps.size() == 100);
  std::set<std::string> ids;
  for (const Episode& e : eps) {
    ids.insert(e.id);
    CHECK(e.map_id == "m1");
    CHECK(is_navigable(g, e.start.position(), 0.18));
    CHECK(is_navigable(g, e.goal, 0.18));
    const DistanceField f = distance_field(g, e.goal, 0.18);
    const double geo = geodesic_distance(f, e.start.position());
    CHECK(e.geodesic_start == doctest::Approx(std::max(geo, e.euclidean_start)));
    CHECK(e.euclidean_start == doctest::Approx(distance(e.start.position(), e.goal)));
    CHECK(e.geodesic_start >= c.min_geo);
    CHECK(e.geodesic_start <= c.max_geo);
    CHECK(e.geodesic_start >= e.euclidean_start);
    CHECK(e.euclidean_start > 0.0);
    CHECK(e.start.theta > -kPi);
    CHECK(e.start.theta <= kPi);
  }
  CHECK(ids.size() == 100);

  RngStream b(5, "episodes", "m1");
  CHECK(generate_episodes(g, 100, c, b, "m1") == eps);

  // Difficult ratio band holds per episode.
  RngStream r(6, "episodes", "m1");
  for (const Episode& e : generate_episodes(g, 20, {1.5, 15.0, 1.3}, r, "m1")) {
    CHECK(e.geodesic_start / e.euclidean_start >= 1.3 - 1e-9);
  }
}

TEST_CASE("generate_episodes impossible band") {
  const OccupancyGrid g = testing::open_room(20, 20, 0.1);
  RngStream rng(1, "episodes", "tiny");
  try {
    generate_episodes(g, 5, {30.0, 30.0, 1.0}, rng, "tiny");
    FAIL("expected a generation error");
  } catch (const GenerationError& e) {
    CHECK(std::string(e.what()).find("generated 0 of 5") != std::string::npos);
  }
  CHECK_THROWS_AS(generate_episodes(g, -1, {}, rng, "tiny"), std::invalid_argument);
}
