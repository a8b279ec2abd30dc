#include "pointnav/gridworld.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

namespace pointnav {

OccupancyGrid::OccupancyGrid(int width, int height, double cell_size,
                             std::vector<std::uint8_t> cells, Vec2 origin)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      origin_(origin),
      cells_(std::move(cells)) {
  if (width_ < 3 || height_ < 3) {
    throw std::invalid_argument("grid must be at least 3x3 cells");
  }
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_)) {
    throw std::invalid_argument("cell size must be positive");
  }
  if (cells_.size() != static_cast<std::size_t>(width_) * height_) {
    throw std::invalid_argument("cell buffer does not match grid size");
  }
  for (int i = 0; i < width_; ++i) {
    if (!occupied(i, 0) || !occupied(i, height_ - 1)) {
      throw std::invalid_argument("grid boundary is not closed");
    }
  }
  for (int j = 0; j < height_; ++j) {
    if (!occupied(0, j) || !occupied(width_ - 1, j)) {
      throw std::invalid_argument("grid boundary is not closed");
    }
  }
}

CellIndex OccupancyGrid::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / cell_size_)),
          static_cast<int>(std::floor((p.y - origin_.y) / cell_size_))};
}

Vec2 OccupancyGrid::cell_center(CellIndex c) const {
  return {origin_.x + (c.i + 0.5) * cell_size_,
          origin_.y + (c.j + 0.5) * cell_size_};
}

// ---------------------------------------------------------------------------
// Text format

OccupancyGrid load_map(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty()) {
    throw MapParseError(1, "empty map");
  }

  constexpr std::string_view kHeader = "cellsize ";
  const std::string_view header = lines.front();
  if (!header.starts_with(kHeader)) {
    throw MapParseError(1, "expected 'cellsize <decimal>'");
  }
  const std::string_view number = header.substr(kHeader.size());
  double cell_size = 0.0;
  const auto [ptr, ec] =
      std::from_chars(number.data(), number.data() + number.size(), cell_size);
  if (ec != std::errc{} || ptr != number.data() + number.size()) {
    throw MapParseError(1, "malformed cellsize '" + std::string(number) + "'");
  }
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw MapParseError(1, "cellsize must be positive");
  }

  const int height = static_cast<int>(lines.size()) - 1;
  if (height < 3) {
    throw MapParseError(static_cast<int>(lines.size()),
                        "map needs at least 3 rows");
  }
  const int width = static_cast<int>(lines[1].size());
  if (width < 3) {
    throw MapParseError(2, "map needs at least 3 columns");
  }

  std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    const int line_no = r + 2;
    const std::string_view row = lines[r + 1];
    if (static_cast<int>(row.size()) != width) {
      throw MapParseError(line_no, "row has " + std::to_string(row.size()) +
                                       " cells, expected " +
                                       std::to_string(width));
    }
    const int j = height - 1 - r;
    for (int i = 0; i < width; ++i) {
      const char c = row[i];
      if (c != '.' && c != '#') {
        throw MapParseError(line_no, std::string("unknown cell character '") +
                                         c + "'");
      }
      const bool occ = c == '#';
      const bool boundary = r == 0 || r == height - 1 || i == 0 || i == width - 1;
      if (boundary && !occ) {
        throw MapParseError(line_no, "open boundary at column " +
                                         std::to_string(i + 1));
      }
      cells[static_cast<std::size_t>(j) * width + i] = occ ? 1 : 0;
    }
  }
  return OccupancyGrid(width, height, cell_size, std::move(cells));
}

std::string save_map(const OccupancyGrid& grid) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), grid.cell_size());
  std::string out = "cellsize ";
  out.append(buf, res.ptr);
  out.push_back('\n');
  out.reserve(out.size() +
              static_cast<std::size_t>(grid.width() + 1) * grid.height());
  for (int j = grid.height() - 1; j >= 0; --j) {
    for (int i = 0; i < grid.width(); ++i) {
      out.push_back(grid.occupied(i, j) ? '#' : '.');
    }
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Procedural generation

namespace {

struct Rect {
  int x0, y0, x1, y1;  // inclusive free cells
  int w() const { return x1 - x0 + 1; }
  int h() const { return y1 - y0 + 1; }
};

struct Wall {
  bool vertical;  // vertical: column `pos`, rows lo..hi
  int pos;
  int lo, hi;
};

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

OccupancyGrid generate_map(const MapSpec& spec) {
  if (spec.room_count < 1) {
    throw GenerationError("room_count must be at least 1");
  }
  if (spec.width < 3 || spec.height < 3 || !(spec.cell_size > 0.0)) {
    throw GenerationError("map must be at least 3x3 cells with positive cell size");
  }
  const double cs = spec.cell_size;
  const int door = static_cast<int>(std::ceil(6.0 * spec.agent_radius / cs - 1e-9));
  const int min_room =
      std::max(door + 2, static_cast<int>(std::ceil(1.5 / cs - 1e-9)));

  std::mt19937_64 rng(spec.seed);
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(spec.width) * spec.height, 1);
  auto at = [&](int i, int j) -> std::uint8_t& {
    return cells[static_cast<std::size_t>(j) * spec.width + i];
  };

  std::vector<Rect> rooms{{1, 1, spec.width - 2, spec.height - 2}};
  if (rooms.front().w() < min_room || rooms.front().h() < min_room) {
    throw GenerationError("map too small for a single room");
  }
  std::vector<Wall> walls;
  while (static_cast<int>(rooms.size()) < spec.room_count) {
    // Split the largest room that still admits two children.
    int best = -1;
    long best_area = -1;
    for (int k = 0; k < static_cast<int>(rooms.size()); ++k) {
      const Rect& r = rooms[k];
      const int longest = std::max(r.w(), r.h());
      const long area = static_cast<long>(r.w()) * r.h();
      if (longest >= 2 * min_room + 1 && area > best_area) {
        best = k;
        best_area = area;
      }
    }
    if (best < 0) {
      throw GenerationError("cannot fit " + std::to_string(spec.room_count) +
                            " rooms; got " + std::to_string(rooms.size()));
    }
    const Rect r = rooms[best];
    if (r.w() >= r.h()) {
      const int x = uniform_int(rng, r.x0 + min_room, r.x1 - min_room);
      walls.push_back({true, x, r.y0, r.y1});
      rooms[best] = {r.x0, r.y0, x - 1, r.y1};
      rooms.push_back({x + 1, r.y0, r.x1, r.y1});
    } else {
      const int y = uniform_int(rng, r.y0 + min_room, r.y1 - min_room);
      walls.push_back({false, y, r.x0, r.x1});
      rooms[best] = {r.x0, r.y0, r.x1, y - 1};
      rooms.push_back({r.x0, y + 1, r.x1, r.y1});
    }
  }

  for (const Rect& r : rooms) {
    for (int j = r.y0; j <= r.y1; ++j) {
      for (int i = r.x0; i <= r.x1; ++i) {
        at(i, j) = 0;
      }
    }
  }
  // Doors: a run of `door` wall cells whose both sides are free.
  for (const Wall& w : walls) {
    auto side_free = [&](int t) {
      return w.vertical ? (!at(w.pos - 1, t) && !at(w.pos + 1, t))
                        : (!at(t, w.pos - 1) && !at(t, w.pos + 1));
    };
    std::vector<int> starts;
    int run = 0;
    for (int t = w.lo; t <= w.hi; ++t) {
      run = side_free(t) ? run + 1 : 0;
      if (run >= door) {
        starts.push_back(t - door + 1);
      }
    }
    if (starts.empty()) {
      throw GenerationError("no room for a door");
    }
    const int s = starts[uniform_int(rng, 0, static_cast<int>(starts.size()) - 1)];
    for (int t = s; t < s + door; ++t) {
      if (w.vertical) {
        at(w.pos, t) = 0;
      } else {
        at(t, w.pos) = 0;
      }
    }
  }

  // Pillars keep a clear gap to everything else so free space stays connected.
  const int gap = static_cast<int>(
      std::ceil(std::max(0.8, 2.0 * spec.agent_radius + 2.0 * cs) / cs - 1e-9));
  for (int placed = 0, attempts = 0;
       placed < spec.clutter && attempts < 200 * std::max(1, spec.clutter);
       ++attempts) {
    const Rect& r = rooms[uniform_int(rng, 0, static_cast<int>(rooms.size()) - 1)];
    const int size = uniform_int(rng, 2, 4);
    if (r.w() < size + 2 * gap || r.h() < size + 2 * gap) {
      continue;
    }
    const int px = uniform_int(rng, r.x0 + gap, r.x1 - gap - size + 1);
    const int py = uniform_int(rng, r.y0 + gap, r.y1 - gap - size + 1);
    bool clear = true;
    for (int j = py - gap; j < py + size + gap && clear; ++j) {
      for (int i = px - gap; i < px + size + gap; ++i) {
        if (at(i, j)) {
          clear = false;
          break;
        }
      }
    }
    if (!clear) {
      continue;
    }
    for (int j = py; j < py + size; ++j) {
      for (int i = px; i < px + size; ++i) {
        at(i, j) = 1;
      }
    }
    ++placed;
  }

  OccupancyGrid grid(spec.width, spec.height, cs, std::move(cells));
  if (count_free_components(grid) != 1) {
    throw GenerationError("generated map is not connected");
  }
  return grid;
}

int count_free_components(const OccupancyGrid& grid) {
  std::vector<std::uint8_t> seen(grid.cell_count(), 0);
  int components = 0;
  std::queue<CellIndex> queue;
  for (int j = 0; j < grid.height(); ++j) {
    for (int i = 0; i < grid.width(); ++i) {
      if (grid.occupied(i, j) || seen[grid.index(i, j)]) {
        continue;
      }
      ++components;
      seen[grid.index(i, j)] = 1;
      queue.push({i, j});
      while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop();
        constexpr int kDi[] = {1, -1, 0, 0};
        constexpr int kDj[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int ni = c.i + kDi[k];
          const int nj = c.j + kDj[k];
          if (!grid.occupied(ni, nj) && !seen[grid.index(ni, nj)]) {
            seen[grid.index(ni, nj)] = 1;
            queue.push({ni, nj});
          }
        }
      }
    }
  }
  return components;
}

// ---------------------------------------------------------------------------
// Queries

namespace {

struct Box {
  double x0, y0, x1, y1;
};

Box cell_box(const OccupancyGrid& grid, int i, int j) {
  const double cs = grid.cell_size();
  const Vec2 o = grid.origin();
  return {o.x + i * cs, o.y + j * cs, o.x + (i + 1) * cs, o.y + (j + 1) * cs};
}

Vec2 closest_point(const Box& b, Vec2 p) {
  return {std::clamp(p.x, b.x0, b.x1), std::clamp(p.y, b.y0, b.y1)};
}

// Cell index range [lo, hi] overlapping the world interval [a, b] on one axis.
std::pair<int, int> cell_span(double a, double b, double origin, double cs) {
  return {static_cast<int>(std::floor((a - origin) / cs)),
          static_cast<int>(std::floor((b - origin) / cs))};
}

}  // namespace

bool is_navigable(const OccupancyGrid& grid, Vec2 p, double radius) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    return false;
  }
  if (grid.occupied(grid.cell_of(p))) {
    return false;
  }
  const double cs = grid.cell_size();
  const Vec2 o = grid.origin();
  const auto [i0, i1] = cell_span(p.x - radius, p.x + radius, o.x, cs);
  const auto [j0, j1] = cell_span(p.y - radius, p.y + radius, o.y, cs);
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (!grid.occupied(i, j)) {
        continue;
      }
      const Box b = cell_box(grid, i, j);
      if (distance(closest_point(b, p), p) < radius) {
        return false;
      }
    }
  }
  return true;
}

double raycast(const OccupancyGrid& grid, Vec2 origin, double bearing,
               double max_range) {
  CellIndex c = grid.cell_of(origin);
  if (grid.occupied(c)) {
    throw std::invalid_argument("raycast origin lies in an occupied cell");
  }
  const double cs = grid.cell_size();
  const Vec2 o = grid.origin();
  const double dx = std::cos(bearing);
  const double dy = std::sin(bearing);
  const int step_i = dx > 0.0 ? 1 : -1;
  const int step_j = dy > 0.0 ? 1 : -1;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Parametric distance to the next vertical / horizontal cell boundary,
  // recomputed from the boundary coordinate to avoid accumulating error.
  auto next_x = [&](int i) {
    if (dx == 0.0) return kInf;
    const double bx = o.x + (step_i > 0 ? i + 1 : i) * cs;
    return (bx - origin.x) / dx;
  };
  auto next_y = [&](int j) {
    if (dy == 0.0) return kInf;
    const double by = o.y + (step_j > 0 ? j + 1 : j) * cs;
    return (by - origin.y) / dy;
  };

  double tx = next_x(c.i);
  double ty = next_y(c.j);
  for (;;) {
    double t;
    if (tx < ty) {
      t = tx;
      c.i += step_i;
      tx = next_x(c.i);
    } else {
      t = ty;
      c.j += step_j;
      ty = next_y(c.j);
    }
    if (t >= max_range) {
      return max_range;
    }
    if (grid.occupied(c)) {
      return std::max(t, std::numeric_limits<double>::min());
    }
  }
}

double DepthScan::bearing(int k) const {
  const int n = n_rays();
  if (n <= 1) {
    return 0.0;
  }
  return -fov / 2.0 + k * fov / (n - 1);
}

DepthScan render_scan(const OccupancyGrid& grid, const Pose& pose,
                      const ScanGeometry& geometry) {
  DepthScan scan;
  scan.fov = geometry.fov;
  scan.max_range = geometry.max_range;
  scan.ranges.resize(static_cast<std::size_t>(geometry.n_rays));
  for (int k = 0; k < geometry.n_rays; ++k) {
    scan.ranges[k] = raycast(grid, pose.position(), pose.theta + scan.bearing(k),
                             geometry.max_range);
  }
  return scan;
}

namespace {

constexpr double kNoHit = std::numeric_limits<double>::infinity();

// First t >= 0 at which p + t*d enters the closed box; kNoHit otherwise.
double slab_entry(const Box& b, Vec2 p, Vec2 d) {
  double t_enter = -kNoHit;
  double t_exit = kNoHit;
  const double lo[2] = {b.x0, b.y0};
  const double hi[2] = {b.x1, b.y1};
  const double pp[2] = {p.x, p.y};
  const double dd[2] = {d.x, d.y};
  for (int a = 0; a < 2; ++a) {
    if (dd[a] == 0.0) {
      if (pp[a] <= lo[a] || pp[a] >= hi[a]) {
        return kNoHit;
      }
      continue;
    }
    double t1 = (lo[a] - pp[a]) / dd[a];
    double t2 = (hi[a] - pp[a]) / dd[a];
    if (t1 > t2) std::swap(t1, t2);
    t_enter = std::max(t_enter, t1);
    t_exit = std::min(t_exit, t2);
  }
  if (t_enter < t_exit && t_exit > 0.0) {
    return std::max(t_enter, 0.0);
  }
  return kNoHit;
}

double circle_entry(Vec2 c, double r, Vec2 p, Vec2 d) {
  const Vec2 m = p - c;
  const double b = m.x * d.x + m.y * d.y;
  const double cc = m.x * m.x + m.y * m.y - r * r;
  const double disc = b * b - cc;
  if (disc < 0.0 || b >= 0.0) {
    return kNoHit;
  }
  const double t = -b - std::sqrt(disc);
  return t >= 0.0 ? t : (cc <= 0.0 ? 0.0 : kNoHit);
}

// First contact of a disc moving along unit d with an axis-aligned box,
// i.e. ray vs. the box inflated by r with rounded corners.
double disc_box_contact(const Box& b, Vec2 p, Vec2 d, double r) {
  const Vec2 q = closest_point(b, p);
  const Vec2 to_box = q - p;
  if (to_box.norm() < r - 1e-12) {
    // Already overlapping: only block motion that goes deeper.
    return (to_box.x * d.x + to_box.y * d.y) > 0.0 ? 0.0 : kNoHit;
  }
  double t = std::min(slab_entry({b.x0 - r, b.y0, b.x1 + r, b.y1}, p, d),
                      slab_entry({b.x0, b.y0 - r, b.x1, b.y1 + r}, p, d));
  for (const Vec2 corner : {Vec2{b.x0, b.y0}, Vec2{b.x1, b.y0},
                            Vec2{b.x0, b.y1}, Vec2{b.x1, b.y1}}) {
    t = std::min(t, circle_entry(corner, r, p, d));
  }
  return t;
}

}  // namespace

double sweep_clearance(const OccupancyGrid& grid, Vec2 p, Vec2 dir,
                       double radius, double limit) {
  const Vec2 end = p + limit * dir;
  const double cs = grid.cell_size();
  const Vec2 o = grid.origin();
  const auto [i0, i1] = cell_span(std::min(p.x, end.x) - radius,
                                  std::max(p.x, end.x) + radius, o.x, cs);
  const auto [j0, j1] = cell_span(std::min(p.y, end.y) - radius,
                                  std::max(p.y, end.y) + radius, o.y, cs);
  double best = limit;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (grid.occupied(i, j)) {
        best = std::min(best, disc_box_contact(cell_box(grid, i, j), p, dir, radius));
      }
    }
  }
  return best;
}

MoveResult translate_with_collision(const OccupancyGrid& grid, const Pose& pose,
                                    Vec2 local_delta, double radius) {
  const double length = local_delta.norm();
  if (length == 0.0) {
    return {pose, false, 1.0};
  }
  const Vec2 world = rotate(local_delta, pose.theta);
  const Vec2 dir = (1.0 / length) * world;
  const double limit = length + kCollisionMargin;
  const double contact = sweep_clearance(grid, pose.position(), dir, radius, limit);
  const double allowed = contact - kCollisionMargin;
  // (limit - margin) need not round back to length, so test the clamp itself.
  if (contact >= limit || allowed >= length) {
    return {{pose.x + world.x, pose.y + world.y, pose.theta}, false, 1.0};
  }
  const double s = std::max(allowed, 0.0);
  return {{pose.x + s * dir.x, pose.y + s * dir.y, pose.theta}, true, s / length};
}

MoveResult move_with_collision(const OccupancyGrid& grid, const Pose& pose,
                               double forward, double radius) {
  return translate_with_collision(grid, pose, {forward, 0.0}, radius);
}

}  // namespace pointnav
