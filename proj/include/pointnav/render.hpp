#pragma once

// Top-down SVG of a map with one episode's true and estimated trajectories.

#include <string>

#include "pointnav/agent.hpp"
#include "pointnav/gridworld.hpp"

namespace pointnav {

struct RenderOptions {
  double pixels_per_metre = 40.0;
  double success_radius = kSuccessDistance;
  bool show_estimate = true;
};

/// Occupied cells, start and goal markers, the success circle around the
/// goal, the true path shaded dark to light over time and the estimated path
/// in a second hue. Output bytes depend only on the inputs.
std::string render_svg(const OccupancyGrid& grid, const TrajectoryLog& log,
                       const RenderOptions& options = {});

}  // namespace pointnav
