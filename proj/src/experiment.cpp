#include "pointnav/experiment.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pointnav/config.hpp"

namespace pointnav {

namespace {

// Calls task(k) for k in [0, n) on up to `workers` threads. The first
// exception thrown by any task is rethrown after all threads finish.
template <typename Task>
void parallel_for(std::size_t n, int workers, Task&& task) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t k = 0; k < n; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      try {
        task(k);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> threads;
  threads.reserve(count);
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(body);
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<TrajectoryLog> run_batch(const OccupancyGrid& grid,
                                     const std::vector<Episode>& episodes,
                                     const EstimatorKind& estimator, const SimConfig& sim,
                                     const PolicyParams& params, std::uint64_t seed,
                                     const EpisodeRunOptions& options, int workers) {
  if (workers < 1) throw std::invalid_argument("run_batch: workers must be >= 1");
  std::vector<TrajectoryLog> logs(episodes.size());
  parallel_for(episodes.size(), workers, [&](std::size_t k) {
    logs[k] = run_episode(grid, episodes[k], estimator, sim, params, seed, options);
  });
  return logs;
}

MetricsReport evaluate_logs(const std::vector<TrajectoryLog>& logs,
                            const std::vector<double>& thresholds,
                            const std::vector<double>& closed_edges) {
  if (thresholds.empty()) {
    throw std::invalid_argument("evaluate_logs: at least one threshold is required");
  }
  std::vector<EpisodeResult> results;
  results.reserve(logs.size());
  MaeSamples samples;
  for (const TrajectoryLog& log : logs) {
    results.push_back(evaluate_episode(log, thresholds.front()));
    collect_mae_samples(log, samples);
  }
  return aggregate(results, samples, thresholds, closed_edges);
}

std::vector<BinRate> spl_by_distance_bins(const std::vector<EpisodeResult>& results,
                                          const std::vector<double>& closed_edges) {
  std::vector<BinRate> bins = success_by_distance_bins(results, closed_edges);
  for (BinRate& b : bins) {
    std::vector<EpisodeResult> in_bin;
    for (const EpisodeResult& r : results) {
      if (r.geodesic_start >= b.lo && r.geodesic_start < b.hi) in_bin.push_back(r);
    }
    b.rate = in_bin.empty() ? 0.0 : spl(in_bin);
  }
  return bins;
}

Json to_json(const CeilingReport& r) {
  Json bins = Json::array();
  for (const BinRate& b : r.spl_by_bin) {
    bins.push_back({{"lo", b.lo},
                    {"hi", std::isfinite(b.hi) ? Json(b.hi) : Json(nullptr)},
                    {"spl", b.rate},
                    {"count", b.count}});
  }
  return Json{{"noise_digest", r.noise_digest},
              {"episode_count", r.episode_count},
              {"trials", r.trials},
              {"spl", r.spl},
              {"success", r.success},
              {"spl_by_bin", bins}};
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return derive_seed(seed, "ceiling", "trial-" + std::to_string(trial));
}

CeilingReport run_ceiling(const OccupancyGrid& grid, const std::vector<Episode>& episodes,
                          const ActuationNoiseConfig& actuation, const PolicyParams& params,
                          int trials, std::uint64_t seed, int workers, double agent_radius,
                          const std::vector<double>& closed_edges) {
  if (episodes.empty()) throw std::invalid_argument("ceiling: no episodes");
  if (trials < 1) throw std::invalid_argument("ceiling: trials must be >= 1");
  if (workers < 1) throw std::invalid_argument("ceiling: workers must be >= 1");
  SimConfig sim;
  sim.actuation = actuation;
  sim.sensor = SensorNoiseConfig::none();
  sim.agent_radius = agent_radius;
  sim.validate();
  params.validate();

  const std::size_t n = episodes.size();
  std::vector<EpisodeResult> results(n * static_cast<std::size_t>(trials));
  parallel_for(results.size(), workers, [&](std::size_t k) {
    const int trial = static_cast<int>(k / n);
    const TrajectoryLog log = run_episode(grid, episodes[k % n], EstimatorKind::ground_truth(),
                                          sim, params, trial_seed(seed, trial));
    results[k] = evaluate_episode(log, params.stop_distance);
  });

  CeilingReport report;
  report.noise_digest = digest(to_json(actuation));
  report.episode_count = static_cast<int>(n);
  report.trials = trials;
  report.spl = spl(results);
  int successes = 0;
  for (const EpisodeResult& r : results) successes += r.success ? 1 : 0;
  report.success = static_cast<double>(successes) / static_cast<double>(results.size());
  report.spl_by_bin = spl_by_distance_bins(results, closed_edges);
  return report;
}

}  // namespace pointnav
