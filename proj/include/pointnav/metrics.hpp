#pragma once

/// \file
/// \brief Navigation metrics (Success, SPL, SoftSuccess, SoftSPL) and
/// egomotion MAE, with per-action and per-distance breakdowns.

#include <span>
#include <string>
#include <vector>

#include "pointnav/action.hpp"
#include "pointnav/agent.hpp"
#include "pointnav/geometry.hpp"

namespace pointnav {

struct EpisodeResult {
  std::string episode_id;
  bool stopped = false;  ///< the agent issued STOP
  bool success = false;  ///< stopped within the primary threshold
  double d_goal_final = 0.0;
  double geodesic_start = 0.0;
  double path_length = 0.0;
  int steps = 0;
  Termination termination = Termination::MaxSteps;
};

/// 1 iff d_final < threshold (strict).
bool success(double d_final, double threshold);

double path_length(std::span<const Pose> poses);

/// Mean of success * geodesic / max(path, geodesic).
double spl(std::span<const EpisodeResult> results);

/// clamp(1 - d_final / geodesic_start, 0, 1).
double soft_success(double d_final, double geodesic_start);

enum class SoftSplVariant {
  Ratio,    ///< geodesic / max(path, geodesic)
  Habitat,  ///< soft_success * ratio
};

double softspl(SoftSplVariant variant, double d_final, double geodesic_start,
               double path_length);

/// Per-action breakdown in the units of the odometry tables.
struct MaeBreakdown {
  double total = 0.0;
  double forward = 0.0;
  double left = 0.0;
  double right = 0.0;
};

struct MaeCounts {
  int total = 0;
  int forward = 0;
  int left = 0;
  int right = 0;
};

struct MaeReport {
  MaeBreakdown translation_cm;
  MaeBreakdown rotation_crad;
  MaeCounts counts;
};

/// Translation term sums |dx|+|dy|+|dz| over the (left, vertical = 0, forward)
/// mapping; rotation uses wrapped yaw differences. Throws
/// std::invalid_argument on length mismatch or STOP actions.
MaeReport mae(std::span<const Egomotion> gt, std::span<const Egomotion> est,
              std::span<const Action> actions);

struct BinRate {
  double lo = 0.0;
  double hi = 0.0;
  double rate = 0.0;
  int count = 0;
};

/// Buckets episodes by geodesic_start into [edge_k, edge_k+1). Empty bins
/// report count 0 and rate 0. Throws if edges are not strictly increasing.
std::vector<BinRate> success_by_distance_bins(std::span<const EpisodeResult> results,
                                              std::span<const double> edges);

struct ThresholdRate {
  double threshold = 0.0;
  double rate = 0.0;
};

struct MetricsReport {
  int episode_count = 0;
  double success_rate = 0.0;
  double spl = 0.0;
  double soft_success_mean = 0.0;
  double softspl_ratio_mean = 0.0;
  double softspl_habitat_mean = 0.0;
  double d_goal_mean = 0.0;
  std::vector<ThresholdRate> success_at;
  std::vector<BinRate> success_by_geo_bin;
  MaeReport mae;
};

struct MaeSamples {
  std::vector<Egomotion> gt;
  std::vector<Egomotion> est;
  std::vector<Action> actions;
};

/// Throws std::invalid_argument on empty results.
MetricsReport aggregate(std::span<const EpisodeResult> results, const MaeSamples& samples,
                        std::span<const double> thresholds, std::span<const double> bin_edges);

/// Outcome of one logged episode judged against `success_threshold`.
EpisodeResult evaluate_episode(const TrajectoryLog& log,
                               double success_threshold = kSuccessDistance);

/// Appends every motion step of the log.
void collect_mae_samples(const TrajectoryLog& log, MaeSamples& samples);

}  // namespace pointnav
