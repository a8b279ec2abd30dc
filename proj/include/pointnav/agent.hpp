#pragma once

/// \file
/// \brief Episode loop: act, move with noise, observe, estimate egomotion,
/// update the goal estimate, decide again.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pointnav/action.hpp"
#include "pointnav/geometry.hpp"
#include "pointnav/gridworld.hpp"
#include "pointnav/noise.hpp"
#include "pointnav/odometry.hpp"
#include "pointnav/planner.hpp"

namespace pointnav {

inline constexpr double kSuccessDistance = 2.0 * kDefaultAgentRadius;

struct PolicyParams {
  double stop_distance = kSuccessDistance;
  double turn_threshold = kPi / 12.0;
  int max_steps = 500;
  double waypoint_lookahead = 1.0;
  /// Extra clearance demanded on the straight line to a waypoint.
  double clearance_margin = 0.05;

  void validate() const;
};

/// Everything about the simulated world that is not the map itself.
struct SimConfig {
  ActuationNoiseConfig actuation;
  SensorNoiseConfig sensor;
  ScanGeometry scan;
  double agent_radius = kDefaultAgentRadius;

  void validate() const;
};

struct AgentState {
  Pose pose_true;
  Pose pose_est;
  GoalVector goal_est;
  int step_count = 0;
  bool collided_last = false;
  /// The last action was a turn away from a blocked heading.
  bool recovering = false;
};

/// Initial state: both poses at the start, goal estimate equal to the true
/// goal in the start frame.
AgentState initial_state(const Episode& episode);

struct StepOutcome {
  AgentState state;
  Egomotion egomotion_true;  ///< realized (post-collision) motion
  bool collided = false;
  std::optional<DepthScan> scan;
};

/// Applies one noisy action to the true pose. The sampled rotation is applied
/// in full; the translation is truncated at contact. The scan of the new pose
/// is rendered and corrupted only when `render` is set. Only pose_true,
/// step_count and collided_last change.
StepOutcome step(const OccupancyGrid& grid, const AgentState& state, Action action,
                 const SimConfig& sim, RngStream& actuation_rng,
                 RngStream& sensor_rng, bool render);

/// Known map available to the policy.
struct NavigationMap {
  const OccupancyGrid* grid = nullptr;
  const DistanceField* field = nullptr;
};

/// Replanning follower: STOP inside stop_distance, otherwise steer toward the
/// next visible waypoint of the known-map shortest path from the estimated
/// pose (or straight at the goal estimate without a map).
Action decide(const AgentState& state, const std::optional<NavigationMap>& map,
              const PolicyParams& params, double radius = kDefaultAgentRadius);

/// Waypoint (world frame) the follower steers to from `position`.
Vec2 select_waypoint(const NavigationMap& map, Vec2 position, Vec2 goal,
                     const PolicyParams& params, double radius);

enum class Termination { Stop, MaxSteps };

std::string_view to_string(Termination t);

struct StepRecord {
  int step = 0;  ///< 1-based index of the action
  Action action = Action::Stop;
  Egomotion egomotion_true;
  Egomotion egomotion_est;
  Pose pose_true;
  Pose pose_est;
  GoalVector goal_est;
  bool collided = false;
  bool fallback = false;
  std::optional<DepthScan> scan;  ///< observation after the action
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct TrajectoryLog {
  Episode episode;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::optional<DepthScan> initial_scan;
  std::vector<StepRecord> records;
  Termination termination = Termination::MaxSteps;

  /// True poses from the start through every record.
  std::vector<Pose> true_poses() const;
  std::vector<Pose> estimated_poses() const;
  friend bool operator==(const TrajectoryLog&, const TrajectoryLog&) = default;
};

struct EpisodeRunOptions {
  bool store_scans = false;
  bool use_map = true;  ///< plan on the known map
  std::string config_digest;
};

/// Runs one episode to STOP or max_steps. Pure in its inputs: the three noise
/// streams are derived from (seed, episode id).
TrajectoryLog run_episode(const OccupancyGrid& grid, const Episode& episode,
                          const EstimatorKind& estimator, const SimConfig& sim,
                          const PolicyParams& params, std::uint64_t seed,
                          const EpisodeRunOptions& options = {});

}  // namespace pointnav
