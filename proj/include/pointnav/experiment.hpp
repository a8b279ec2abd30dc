#pragma once

// Batch execution of episodes and the oracle-follower ceiling study.

#include <cstdint>
#include <string>
#include <vector>

#include "pointnav/agent.hpp"
#include "pointnav/io.hpp"
#include "pointnav/metrics.hpp"

namespace pointnav {

/// Runs every episode, fanning out over `workers` threads. The result is in
/// episode order and does not depend on the worker count.
std::vector<TrajectoryLog> run_batch(const OccupancyGrid& grid,
                                     const std::vector<Episode>& episodes,
                                     const EstimatorKind& estimator, const SimConfig& sim,
                                     const PolicyParams& params, std::uint64_t seed,
                                     const EpisodeRunOptions& options, int workers = 1);

/// Metrics over a set of logs: success at `thresholds` (the first is the
/// primary one), success by geodesic bin, and egomotion MAE.
MetricsReport evaluate_logs(const std::vector<TrajectoryLog>& logs,
                            const std::vector<double>& thresholds,
                            const std::vector<double>& closed_edges);

/// SPL per geodesic bin; `rate` holds the SPL of the bin.
std::vector<BinRate> spl_by_distance_bins(const std::vector<EpisodeResult>& results,
                                          const std::vector<double>& closed_edges);

struct CeilingReport {
  std::string noise_digest;
  int episode_count = 0;  ///< distinct episodes
  int trials = 0;
  double spl = 0.0;
  double success = 0.0;
  std::vector<BinRate> spl_by_bin;
};

Json to_json(const CeilingReport& r);

/// Seed of ceiling trial `trial`, derived from the global seed.
std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// Oracle follower with ground-truth localization, `trials` runs per episode
/// under `actuation`. Throws std::invalid_argument on bad inputs before
/// running anything.
CeilingReport run_ceiling(const OccupancyGrid& grid, const std::vector<Episode>& episodes,
                          const ActuationNoiseConfig& actuation, const PolicyParams& params,
                          int trials, std::uint64_t seed, int workers = 1,
                          double agent_radius = kDefaultAgentRadius,
                          const std::vector<double>& closed_edges = {0.0, 3.0, 8.0, kUnreachable});

}  // namespace pointnav
