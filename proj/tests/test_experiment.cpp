#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "pointnav/experiment.hpp"
#include "support.hpp"

using namespace pointnav;

namespace {

std::vector<Episode> batch(const OccupancyGrid& g, int n, std::uint64_t seed) {
  RngStream rng(seed, "episodes", "exp");
  return generate_episodes(g, n, {}, rng, "exp");
}

}  // namespace

TEST_CASE("run_batch does not depend on the worker count") {
  const OccupancyGrid g = testing::cluttered_map(31);
  const std::vector<Episode> eps = batch(g, 12, 31);
  for (const EstimatorKind& k : {EstimatorKind::dead_reckon(), EstimatorKind::icp_matcher()}) {
    const auto one = run_batch(g, eps, k, SimConfig{}, PolicyParams{}, 5, {}, 1);
    const auto three = run_batch(g, eps, k, SimConfig{}, PolicyParams{}, 5, {}, 3);
    REQUIRE(one.size() == eps.size());
    CHECK(one == three);
    for (std::size_t i = 0; i < eps.size(); ++i) CHECK(one[i].episode == eps[i]);
  }
  CHECK_THROWS_AS(run_batch(g, eps, EstimatorKind::dead_reckon(), SimConfig{}, PolicyParams{}, 5,
                            {}, 0),
                  std::invalid_argument);
}

TEST_CASE("evaluate_logs and SPL bins") {
  const OccupancyGrid g = testing::cluttered_map(32);
  const std::vector<Episode> eps = batch(g, 20, 32);
  const auto logs =
      run_batch(g, eps, EstimatorKind::ground_truth(), SimConfig{}, PolicyParams{}, 2, {}, 1);
  const std::vector<double> edges{0.0, 3.0, 8.0, kUnreachable};
  const MetricsReport m = evaluate_logs(logs, {0.36, 0.70}, edges);
  CHECK(m.episode_count == 20);
  CHECK(m.success_at.size() == 2);
  CHECK(m.success_at[0].rate == m.success_rate);
  CHECK(m.success_at[1].rate >= m.success_at[0].rate);
  CHECK(m.spl <= m.success_rate);
  CHECK(m.mae.translation_cm.total == 0.0);
  CHECK(m.mae.counts.total > 0);

  std::vector<EpisodeResult> rs;
  for (const TrajectoryLog& l : logs) rs.push_back(evaluate_episode(l));
  int counted = 0;
  for (const BinRate& b : spl_by_distance_bins(rs, edges)) {
    counted += b.count;
    CHECK(b.rate >= 0.0);
    CHECK(b.rate <= 1.0);
  }
  CHECK(counted == 20);
}

TEST_CASE("ceiling") {
  const OccupancyGrid g = testing::cluttered_map(33);
  const std::vector<Episode> eps = batch(g, 15, 33);
  const CeilingReport a = run_ceiling(g, eps, ActuationNoiseConfig{}, PolicyParams{}, 1, 4);
  const CeilingReport b = run_ceiling(g, eps, ActuationNoiseConfig{}, PolicyParams{}, 1, 4, 2);
  CHECK(a.spl == b.spl);
  CHECK(a.success == b.success);
  CHECK(a.episode_count == 15);
  CHECK(a.trials == 1);
  CHECK(a.spl <= a.success);

  const CeilingReport clean =
      run_ceiling(g, eps, ActuationNoiseConfig::none(), PolicyParams{}, 2, 4);
  CHECK(clean.success == 1.0);
  CHECK(clean.spl > 0.85);
  CHECK(clean.noise_digest != a.noise_digest);
  const Json j = to_json(clean);
  CHECK(j.contains("spl"));
  CHECK(j.contains("spl_by_bin"));

  CHECK(trial_seed(4, 0) != trial_seed(4, 1));
  CHECK(trial_seed(4, 0) == trial_seed(4, 0));
  CHECK_THROWS_AS(run_ceiling(g, eps, ActuationNoiseConfig{}, PolicyParams{}, 0, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_ceiling(g, {}, ActuationNoiseConfig{}, PolicyParams{}, 1, 4),
                  std::invalid_argument);
}
