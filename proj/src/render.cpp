#include "pointnav/render.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace pointnav {

namespace {

struct Rgb {
  int r, g, b;
};

// Dark and light ends of the true-path ramp, and the estimate colour.
constexpr Rgb kTrueDark{8, 48, 107};
constexpr Rgb kTrueLight{158, 202, 225};
constexpr Rgb kEstimate{230, 85, 13};

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

Rgb lerp(Rgb a, Rgb b, double t) {
  auto mix = [t](int x, int y) { return static_cast<int>(std::lround(x + (y - x) * t)); };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Canvas {
 public:
  Canvas(const OccupancyGrid& grid, double scale)
      : origin_(grid.origin()),
        scale_(scale),
        height_m_(grid.height() * grid.cell_size()) {}

  double x(double wx) const { return (wx - origin_.x) * scale_; }
  double y(double wy) const { return (height_m_ - (wy - origin_.y)) * scale_; }
  double len(double m) const { return m * scale_; }

 private:
  Vec2 origin_;
  double scale_;
  double height_m_;
};

}  // namespace

std::string render_svg(const OccupancyGrid& grid, const TrajectoryLog& log,
                       const RenderOptions& options) {
  const Canvas c(grid, options.pixels_per_metre);
  const double cs = grid.cell_size();
  const double w = c.len(grid.width() * cs);
  const double h = c.len(grid.height() * cs);

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" +
         num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"#ffffff\"/>\n";

  // Occupied cells, one rectangle per horizontal run.
  out += "<g id=\"occupancy\" fill=\"#404040\">\n";
  for (int j = 0; j < grid.height(); ++j) {
    int i = 0;
    while (i < grid.width()) {
      if (!grid.occupied(i, j)) {
        ++i;
        continue;
      }
      const int run_start = i;
      while (i < grid.width() && grid.occupied(i, j)) ++i;
      const double x0 = grid.origin().x + run_start * cs;
      const double y1 = grid.origin().y + (j + 1) * cs;
      out += "<rect x=\"" + num(c.x(x0)) + "\" y=\"" + num(c.y(y1)) + "\" width=\"" +
             num(c.len((i - run_start) * cs)) + "\" height=\"" + num(c.len(cs)) + "\"/>\n";
    }
  }
  out += "</g>\n";

  const Vec2 goal = log.episode.goal;
  out += "<circle id=\"success-zone\" cx=\"" + num(c.x(goal.x)) + "\" cy=\"" + num(c.y(goal.y)) +
         "\" r=\"" + num(c.len(options.success_radius)) +
         "\" fill=\"none\" stroke=\"#31a354\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n";

  // STOP records repeat the previous pose and add nothing to either path.
  std::vector<Pose> truth{log.episode.start};
  std::vector<Pose> est{log.episode.start};
  for (const StepRecord& r : log.records) {
    if (r.action == Action::Stop) continue;
    truth.push_back(r.pose_true);
    est.push_back(r.pose_est);
  }
  out += "<g id=\"true-path\" stroke-width=\"2.5\" stroke-linecap=\"round\">\n";
  const std::size_t segments = truth.size() > 1 ? truth.size() - 1 : 0;
  for (std::size_t k = 0; k < segments; ++k) {
    const double t = segments > 1 ? static_cast<double>(k) / static_cast<double>(segments - 1) : 0.0;
    out += "<line x1=\"" + num(c.x(truth[k].x)) + "\" y1=\"" + num(c.y(truth[k].y)) +
           "\" x2=\"" + num(c.x(truth[k + 1].x)) + "\" y2=\"" + num(c.y(truth[k + 1].y)) +
           "\" stroke=\"" + hex(lerp(kTrueDark, kTrueLight, t)) + "\"/>\n";
  }
  out += "</g>\n";

  if (options.show_estimate && est.size() > 1) {
    out += "<polyline id=\"estimated-path\" fill=\"none\" stroke=\"" + hex(kEstimate) +
           "\" stroke-width=\"1.5\" stroke-dasharray=\"5 3\" points=\"";
    for (std::size_t k = 0; k < est.size(); ++k) {
      if (k > 0) out += ' ';
      out += num(c.x(est[k].x)) + "," + num(c.y(est[k].y));
    }
    out += "\"/>\n";
  }

  const Pose& s = log.episode.start;
  const double marker = c.len(0.15);
  out += "<circle id=\"start\" cx=\"" + num(c.x(s.x)) + "\" cy=\"" + num(c.y(s.y)) + "\" r=\"" +
         num(marker) + "\" fill=\"" + hex(kTrueDark) + "\"/>\n";
  // Heading tick on the start marker.
  out += "<line x1=\"" + num(c.x(s.x)) + "\" y1=\"" + num(c.y(s.y)) + "\" x2=\"" +
         num(c.x(s.x + 0.3 * std::cos(s.theta))) + "\" y2=\"" +
         num(c.y(s.y + 0.3 * std::sin(s.theta))) + "\" stroke=\"" + hex(kTrueDark) +
         "\" stroke-width=\"2\"/>\n";
  out += "<circle id=\"goal\" cx=\"" + num(c.x(goal.x)) + "\" cy=\"" + num(c.y(goal.y)) +
         "\" r=\"" + num(marker) + "\" fill=\"#de2d26\"/>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace pointnav
