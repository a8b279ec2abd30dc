#include "pointnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pointnav {

bool success(double d_final, double threshold) { return d_final < threshold; }

double path_length(std::span<const Pose> poses) {
  double total = 0.0;
  for (std::size_t k = 1; k < poses.size(); ++k) {
    total += distance(poses[k - 1].position(), poses[k].position());
  }
  return total;
}

double spl(std::span<const EpisodeResult> results) {
  if (results.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (const EpisodeResult& r : results) {
    if (r.success) {
      total += r.geodesic_start / std::max(r.path_length, r.geodesic_start);
    }
  }
  return total / static_cast<double>(results.size());
}

double soft_success(double d_final, double geodesic_start) {
  return std::clamp(1.0 - d_final / geodesic_start, 0.0, 1.0);
}

double softspl(SoftSplVariant variant, double d_final, double geodesic_start,
               double path_length) {
  const double ratio = geodesic_start / std::max(path_length, geodesic_start);
  if (variant == SoftSplVariant::Ratio) {
    return ratio;
  }
  return soft_success(d_final, geodesic_start) * ratio;
}

MaeReport mae(std::span<const Egomotion> gt, std::span<const Egomotion> est,
              std::span<const Action> actions) {
  if (gt.size() != est.size() || gt.size() != actions.size()) {
    throw std::invalid_argument("mae: sequence lengths differ");
  }
  MaeBreakdown t_sum, r_sum;
  MaeCounts n;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    // (x, y, z) = (left, vertical, forward); the vertical term is zero.
    const double dx = std::abs(gt[k].ey - est[k].ey);
    const double dy = 0.0;
    const double dz = std::abs(gt[k].ex - est[k].ex);
    const double t = dx + dy + dz;
    const double r = std::abs(wrap_angle(gt[k].etheta - est[k].etheta));
    t_sum.total += t;
    r_sum.total += r;
    ++n.total;
    switch (actions[k]) {
      case Action::MoveForward: t_sum.forward += t; r_sum.forward += r; ++n.forward; break;
      case Action::TurnLeft: t_sum.left += t; r_sum.left += r; ++n.left; break;
      case Action::TurnRight: t_sum.right += t; r_sum.right += r; ++n.right; break;
      case Action::Stop: throw std::invalid_argument("mae: STOP has no egomotion");
    }
  }
  auto mean = [](double sum, int count, double scale) {
    return count > 0 ? scale * sum / count : 0.0;
  };
  MaeReport report;
  report.counts = n;
  report.translation_cm = {mean(t_sum.total, n.total, 100.0),
                           mean(t_sum.forward, n.forward, 100.0),
                           mean(t_sum.left, n.left, 100.0),
                           mean(t_sum.right, n.right, 100.0)};
  report.rotation_crad = {mean(r_sum.total, n.total, 100.0),
                          mean(r_sum.forward, n.forward, 100.0),
                          mean(r_sum.left, n.left, 100.0),
                          mean(r_sum.right, n.right, 100.0)};
  return report;
}

std::vector<BinRate> success_by_distance_bins(std::span<const EpisodeResult> results,
                                              std::span<const double> edges) {
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) {
      throw std::invalid_argument("bin edges must be strictly increasing");
    }
  }
  std::vector<BinRate> bins;
  for (std::size_t k = 1; k < edges.size(); ++k) {
    BinRate b{edges[k - 1], edges[k], 0.0, 0};
    int successes = 0;
    for (const EpisodeResult& r : results) {
      if (r.geodesic_start >= b.lo && r.geodesic_start < b.hi) {
        ++b.count;
        successes += r.success ? 1 : 0;
      }
    }
    b.rate = b.count > 0 ? static_cast<double>(successes) / b.count : 0.0;
    bins.push_back(b);
  }
  return bins;
}

MetricsReport aggregate(std::span<const EpisodeResult> results, const MaeSamples& samples,
                        std::span<const double> thresholds, std::span<const double> bin_edges) {
  if (results.empty()) {
    throw std::invalid_argument("aggregate: no episodes");
  }
  MetricsReport report;
  const double n = static_cast<double>(results.size());
  report.episode_count = static_cast<int>(results.size());
  int successes = 0;
  for (const EpisodeResult& r : results) {
    successes += r.success ? 1 : 0;
    report.soft_success_mean += soft_success(r.d_goal_final, r.geodesic_start);
    report.softspl_ratio_mean +=
        softspl(SoftSplVariant::Ratio, r.d_goal_final, r.geodesic_start, r.path_length);
    report.softspl_habitat_mean +=
        softspl(SoftSplVariant::Habitat, r.d_goal_final, r.geodesic_start, r.path_length);
    report.d_goal_mean += r.d_goal_final;
  }
  report.success_rate = successes / n;
  report.spl = spl(results);
  report.soft_success_mean /= n;
  report.softspl_ratio_mean /= n;
  report.softspl_habitat_mean /= n;
  report.d_goal_mean /= n;
  for (const double t : thresholds) {
    int hits = 0;
    for (const EpisodeResult& r : results) {
      hits += (r.stopped && success(r.d_goal_final, t)) ? 1 : 0;
    }
    report.success_at.push_back({t, hits / n});
  }
  report.success_by_geo_bin = success_by_distance_bins(results, bin_edges);
  if (!samples.gt.empty()) {
    report.mae = mae(samples.gt, samples.est, samples.actions);
  }
  if (report.spl > report.success_rate) {
    throw std::logic_error("aggregate: spl exceeds success rate");
  }
  return report;
}

EpisodeResult evaluate_episode(const TrajectoryLog& log, double success_threshold) {
  EpisodeResult r;
  r.episode_id = log.episode.id;
  const std::vector<Pose> poses = log.true_poses();
  r.stopped = log.termination == Termination::Stop;
  r.d_goal_final = distance(poses.back().position(), log.episode.goal);
  r.success = r.stopped && success(r.d_goal_final, success_threshold);
  r.geodesic_start = log.episode.geodesic_start;
  r.path_length = path_length(poses);
  r.steps = static_cast<int>(log.records.size());
  r.termination = log.termination;
  return r;
}

void collect_mae_samples(const TrajectoryLog& log, MaeSamples& samples) {
  for (const StepRecord& rec : log.records) {
    if (rec.action == Action::Stop) continue;
    samples.gt.push_back(rec.egomotion_true);
    samples.est.push_back(rec.egomotion_est);
    samples.actions.push_back(rec.action);
  }
}

}  // namespace pointnav
