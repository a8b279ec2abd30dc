#include "pointnav/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace pointnav {

void PolicyParams::validate() const {
  if (!(stop_distance > 0.0)) throw std::invalid_argument("stop_distance must be > 0");
  if (!(turn_threshold >= 0.0)) throw std::invalid_argument("turn_threshold must be >= 0");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (!(waypoint_lookahead > 0.0)) throw std::invalid_argument("waypoint_lookahead must be > 0");
  if (!(clearance_margin >= 0.0)) throw std::invalid_argument("clearance_margin must be >= 0");
}

void SimConfig::validate() const {
  actuation.validate();
  sensor.validate();
  if (scan.n_rays < 1) throw std::invalid_argument("scan n_rays must be >= 1");
  if (!(scan.fov >= 0.0) || scan.fov > 2.0 * kPi) {
    throw std::invalid_argument("scan fov must lie in [0, 2 pi]");
  }
  if (!(scan.max_range > 0.0)) throw std::invalid_argument("scan max_range must be > 0");
  if (!(agent_radius > 0.0)) throw std::invalid_argument("agent_radius must be > 0");
}

std::string_view to_string(Termination t) {
  return t == Termination::Stop ? "stop" : "max_steps";
}

AgentState initial_state(const Episode& episode) {
  return {episode.start, episode.start, goal_vector(episode.start, episode.goal), 0, false};
}

StepOutcome step(const OccupancyGrid& grid, const AgentState& state, Action action,
                 const SimConfig& sim, RngStream& actuation_rng,
                 RngStream& sensor_rng, bool render) {
  const Egomotion sampled = sample_actuation(action, sim.actuation, actuation_rng);
  const MoveResult moved = translate_with_collision(
      grid, state.pose_true, {sampled.ex, sampled.ey}, sim.agent_radius);
  const Egomotion realized{sampled.ex * moved.fraction, sampled.ey * moved.fraction,
                           sampled.etheta};

  StepOutcome out;
  out.state = state;
  out.state.pose_true = apply_egomotion(state.pose_true, realized);
  out.state.step_count = state.step_count + 1;
  out.state.collided_last = moved.collided;
  out.egomotion_true = realized;
  out.collided = moved.collided;
  if (render) {
    out.scan = corrupt_scan(render_scan(grid, out.state.pose_true, sim.scan),
                            sim.sensor, sensor_rng);
  }
  return out;
}

namespace {

bool line_clear(const OccupancyGrid& grid, Vec2 from, Vec2 to, double radius) {
  const double d = distance(from, to);
  if (d == 0.0) {
    return true;
  }
  const Vec2 dir = (1.0 / d) * (to - from);
  return sweep_clearance(grid, from, dir, radius, d) >= d;
}

// Reachable cell closest to p when p's own cell has no field value.
std::optional<CellIndex> nearest_reachable(const DistanceField& field, Vec2 p) {
  const CellIndex c = field.cell_of(p);
  if (std::isfinite(field.at(c))) {
    return c;
  }
  const int reach = static_cast<int>(std::ceil(1.0 / field.cell_size()));
  std::optional<CellIndex> best;
  double best_d = kUnreachable;
  for (int dj = -reach; dj <= reach; ++dj) {
    for (int di = -reach; di <= reach; ++di) {
      const CellIndex n{c.i + di, c.j + dj};
      if (!std::isfinite(field.at(n))) continue;
      const double d = distance(field.cell_center(n), p);
      if (d < best_d) {
        best_d = d;
        best = n;
      }
    }
  }
  return best;
}

}  // namespace

Vec2 select_waypoint(const NavigationMap& map, Vec2 position, Vec2 goal,
                     const PolicyParams& params, double radius) {
  const OccupancyGrid& grid = *map.grid;
  const DistanceField& field = *map.field;
  const double clearance = radius + params.clearance_margin;
  if (distance(position, goal) <= params.waypoint_lookahead &&
      line_clear(grid, position, goal, clearance)) {
    return goal;
  }
  const auto start = nearest_reachable(field, position);
  if (!start) {
    return goal;
  }

  // Cells along the descent, up to the lookahead arc length.
  std::vector<Vec2> vertices;
  std::vector<Vec2> descent = shortest_path(field, field.cell_center(*start));
  double arc = 0.0;
  Vec2 prev = position;
  for (const Vec2& v : descent) {
    arc += distance(prev, v);
    if (arc > params.waypoint_lookahead) break;
    vertices.push_back(v);
    prev = v;
  }
  // Targets closer than half a step get overshot and revisited. Prefer a
  // vertex visible with the clearance margin, then one visible at all.
  const double min_dist = 0.5 * kForwardStep;
  for (const double r : {clearance, radius}) {
    for (auto it = vertices.rbegin(); it != vertices.rend(); ++it) {
      if (distance(*it, position) > min_dist && line_clear(grid, position, *it, r)) {
        return *it;
      }
    }
  }
  for (const Vec2& v : descent) {
    if (distance(v, position) > min_dist) {
      return v;
    }
  }
  return goal;
}

namespace {

struct Decision {
  Action action;
  bool recovery;  // a turn made only because the way ahead is blocked
};

Decision plan(const AgentState& state, const std::optional<NavigationMap>& map,
              const PolicyParams& params, double radius) {
  if (state.goal_est.norm() < params.stop_distance) {
    return {Action::Stop, false};
  }
  const bool have_map = map && map->grid && map->field;
  bool blocked = false;
  if (have_map) {
    const Pose& p = state.pose_est;
    const Vec2 heading{std::cos(p.theta), std::sin(p.theta)};
    blocked = sweep_clearance(*map->grid, p.position(), heading, radius, kForwardStep) <
              kForwardStep;
  }
  // One step out of a recovery turn, so the agent leaves the obstacle rather
  // than turning straight back into it.
  if (state.recovering && !blocked) {
    return {Action::MoveForward, false};
  }
  GoalVector target = state.goal_est;
  if (have_map) {
    const Vec2 goal = goal_world(state.pose_est, state.goal_est);
    const Vec2 waypoint =
        select_waypoint(*map, state.pose_est.position(), goal, params, radius);
    target = goal_vector(state.pose_est, waypoint);
  }
  const double bearing = std::atan2(target.gy, target.gx);
  const Action toward = bearing >= 0.0 ? Action::TurnLeft : Action::TurnRight;
  if (std::abs(bearing) > params.turn_threshold) {
    return {toward, false};
  }
  if (blocked) {
    return {toward, true};
  }
  return {Action::MoveForward, false};
}

}  // namespace

Action decide(const AgentState& state, const std::optional<NavigationMap>& map,
              const PolicyParams& params, double radius) {
  return plan(state, map, params, radius).action;
}

std::vector<Pose> TrajectoryLog::true_poses() const {
  std::vector<Pose> poses{episode.start};
  for (const StepRecord& r : records) {
    poses.push_back(r.pose_true);
  }
  return poses;
}

std::vector<Pose> TrajectoryLog::estimated_poses() const {
  std::vector<Pose> poses{episode.start};
  for (const StepRecord& r : records) {
    poses.push_back(r.pose_est);
  }
  return poses;
}

TrajectoryLog run_episode(const OccupancyGrid& grid, const Episode& episode,
                          const EstimatorKind& estimator, const SimConfig& sim,
                          const PolicyParams& params, std::uint64_t seed,
                          const EpisodeRunOptions& options) {
  RngStream actuation_rng(seed, episode.id, "actuation");
  RngStream sensor_rng(seed, episode.id, "sensor");
  RngStream estimator_rng(seed, episode.id, "estimator");

  TrajectoryLog log;
  log.episode = episode;
  log.seed = seed;
  log.config_digest = options.config_digest;

  const bool render = estimator.needs_scans() || options.store_scans;
  std::optional<DepthScan> scan_prev;
  if (render) {
    scan_prev = corrupt_scan(render_scan(grid, episode.start, sim.scan), sim.sensor,
                             sensor_rng);
    if (options.store_scans) {
      log.initial_scan = scan_prev;
    }
  }

  std::optional<DistanceField> field;
  std::optional<NavigationMap> map;
  if (options.use_map) {
    // Plan with the clearance margin so paths leave room for heading slack;
    // a goal too close to a wall for that falls back to the bare radius.
    const double inflated = sim.agent_radius + params.clearance_margin;
    field = is_navigable(grid, episode.goal, inflated)
                ? distance_field(grid, episode.goal, inflated)
                : distance_field(grid, episode.goal, sim.agent_radius);
    map = NavigationMap{&grid, &*field};
  }

  AgentState state = initial_state(episode);
  const DepthScan empty_scan;
  for (;;) {
    const Decision decision = plan(state, map, params, sim.agent_radius);
    const Action action = decision.action;
    if (action == Action::Stop) {
      StepRecord r;
      r.step = state.step_count + 1;
      r.action = Action::Stop;
      r.pose_true = state.pose_true;
      r.pose_est = state.pose_est;
      r.goal_est = state.goal_est;
      log.records.push_back(std::move(r));
      log.termination = Termination::Stop;
      break;
    }
    if (state.step_count >= params.max_steps) {
      log.termination = Termination::MaxSteps;
      break;
    }
    StepOutcome out = step(grid, state, action, sim, actuation_rng, sensor_rng, render);
    const EstimateResult est =
        estimate(estimator, render ? *scan_prev : empty_scan,
                 render ? *out.scan : empty_scan, action, out.egomotion_true,
                 &estimator_rng);
    state = out.state;
    state.recovering = decision.recovery;
    state.pose_est = apply_egomotion(state.pose_est, est.egomotion);
    state.goal_est = update_goal(state.goal_est, est.egomotion);

    StepRecord r;
    r.step = state.step_count;
    r.action = action;
    r.egomotion_true = out.egomotion_true;
    r.egomotion_est = est.egomotion;
    r.pose_true = state.pose_true;
    r.pose_est = state.pose_est;
    r.goal_est = state.goal_est;
    r.collided = out.collided;
    r.fallback = est.fallback;
    if (options.store_scans) {
      r.scan = out.scan;
    }
    log.records.push_back(std::move(r));
    if (render) {
      scan_prev = std::move(out.scan);
    }
  }
  return log;
}

}  // namespace pointnav
