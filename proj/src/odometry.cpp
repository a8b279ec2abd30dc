#include "pointnav/odometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pointnav {

void EstimatorKind::validate() const {
  if (!(sigma_translation >= 0.0) || !(sigma_rotation >= 0.0)) {
    throw std::invalid_argument("noisy_oracle sigmas must be >= 0");
  }
  if (icp.max_iterations < 1) {
    throw std::invalid_argument("icp max_iterations must be >= 1");
  }
  if (!(icp.eps_translation > 0.0) || !(icp.eps_rotation > 0.0)) {
    throw std::invalid_argument("icp convergence eps must be > 0");
  }
  if (!(icp.max_correspondence_dist > 0.0)) {
    throw std::invalid_argument("icp max_correspondence_dist must be > 0");
  }
  if (icp.min_inliers < 3) {
    throw std::invalid_argument("icp min_inliers must be >= 3");
  }
  if (!(icp.trim_fraction > 0.0) || icp.trim_fraction > 1.0) {
    throw std::invalid_argument("icp trim_fraction must lie in (0, 1]");
  }
  if (!(icp.prior_sigma_forward > 0.0) || !(icp.prior_sigma_turn > 0.0) ||
      !(icp.prior_sigma_rotation > 0.0) || !(icp.min_residual_sigma > 0.0) ||
      !(icp.residual_inflation > 0.0)) {
    throw std::invalid_argument("icp prior and residual sigmas must be > 0");
  }
  if (icp.normal_half_window < 1) {
    throw std::invalid_argument("icp normal_half_window must be >= 1");
  }
  if (icp.median_window < 1 || icp.median_window % 2 == 0) {
    throw std::invalid_argument("icp median_window must be odd and >= 1");
  }
}

std::string_view to_string(EstimatorKind::Type t) {
  switch (t) {
    case EstimatorKind::Type::GroundTruth: return "ground_truth";
    case EstimatorKind::Type::DeadReckon: return "dead_reckon";
    case EstimatorKind::Type::NoisyOracle: return "noisy_oracle";
    case EstimatorKind::Type::Icp: return "icp";
  }
  return "ground_truth";
}

std::optional<EstimatorKind::Type> parse_estimator_type(std::string_view s) {
  using T = EstimatorKind::Type;
  for (T t : {T::GroundTruth, T::DeadReckon, T::NoisyOracle, T::Icp}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::vector<Vec2> scan_to_points(const DepthScan& scan) {
  std::vector<Vec2> points;
  points.reserve(scan.ranges.size());
  for (int k = 0; k < scan.n_rays(); ++k) {
    const double r = scan.ranges[k];
    if (r < scan.max_range) {
      const double b = scan.bearing(k);
      points.push_back({r * std::cos(b), r * std::sin(b)});
    }
  }
  return points;
}

// ---------------------------------------------------------------------------
// ICP

namespace {

// Reference surface: returns of the previous scan, with consecutive rays
// joined into segments unless a depth jump separates them.
class SurfaceModel {
 public:
  SurfaceModel(const DepthScan& scan, int normal_half_window) {
    const double step = scan.n_rays() > 1 ? scan.fov / (scan.n_rays() - 1) : 0.0;
    int prev_ray = -2;
    for (int k = 0; k < scan.n_rays(); ++k) {
      const double r = scan.ranges[k];
      if (!(r < scan.max_range)) {
        continue;
      }
      const double b = scan.bearing(k);
      const Vec2 p{r * std::cos(b), r * std::sin(b)};
      bool joined = false;
      if (prev_ray == k - 1 && !points_.empty()) {
        const double r_prev = scan.ranges[k - 1];
        const double gap = distance(points_.back(), p);
        joined = gap <= std::max(0.15, 8.0 * std::min(r, r_prev) * step);
      }
      if (!points_.empty()) {
        linked_next_.back() = joined;
      }
      points_.push_back(p);
      linked_next_.push_back(false);
      prev_ray = k;
    }
    estimate_normals(normal_half_window);
  }

  // Buckets every segment (and isolated return) into a dense grid of
  // `bucket`-sized cells covering its bounding box. Queries with a gate of
  // at most `bucket` then touch at most 3x3 cells.
  void build_index(double bucket) {
    bucket_ = bucket;
    lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-lo_.x, -lo_.y};
    for (const Vec2& p : points_) {
      lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    nx_ = static_cast<int>(std::floor((hi.x - lo_.x) / bucket_)) + 1;
    ny_ = static_cast<int>(std::floor((hi.y - lo_.y) / bucket_)) + 1;
    cells_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), {});
    for (std::size_t k = 0; k < points_.size(); ++k) {
      const bool linked_prev = k > 0 && linked_next_[k - 1];
      if (!linked_next_[k] && linked_prev) continue;  // covered by segment k-1
      const Vec2 a = points_[k];
      const Vec2 b = linked_next_[k] ? points_[k + 1] : a;
      const int i0 = cx(std::min(a.x, b.x)), i1 = cx(std::max(a.x, b.x));
      const int j0 = cy(std::min(a.y, b.y)), j1 = cy(std::max(a.y, b.y));
      for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
          cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<std::uint32_t>(k));
        }
      }
    }
  }

  bool empty() const { return points_.empty(); }

  struct Hit {
    Vec2 point;
    Vec2 normal;     // unit normal of the matched segment
    bool on_segment;  // false: matched an isolated return or an endpoint
  };

  // Closest point of the surface to q within max_dist, or nullopt. A match
  // that only reaches the surface by running off the end of an observed run
  // is rejected: that part of the world was not seen.
  std::optional<Hit> match(Vec2 q, double max_dist) const {
    const int i0 = std::max(0, cx(q.x - max_dist)), i1 = std::min(nx_ - 1, cx(q.x + max_dist));
    const int j0 = std::max(0, cy(q.y - max_dist)), j1 = std::min(ny_ - 1, cy(q.y + max_dist));
    // Squared distances; the normal is only worked out for the winner.
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    double best_t = 0.0;
    bool best_segment = false;
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        for (const std::uint32_t k : cells_[static_cast<std::size_t>(j) * nx_ + i]) {
          if (linked_next_[k]) {
            const Vec2 a = points_[k];
            const Vec2 ab = points_[k + 1] - a;
            const double t = ((q.x - a.x) * ab.x + (q.y - a.y) * ab.y) /
                             (ab.x * ab.x + ab.y * ab.y);
            const Vec2 d = a + std::clamp(t, 0.0, 1.0) * ab - q;
            const double d2 = d.x * d.x + d.y * d.y;
            if (d2 < best) {
              best = d2;
              best_k = k;
              best_t = t;
              best_segment = true;
            }
          } else {
            const Vec2 d = points_[k] - q;
            const double d2 = d.x * d.x + d.y * d.y;
            if (d2 < best) {
              best = d2;
              best_k = k;
              best_segment = false;
            }
          }
        }
      }
    }
    if (!(best <= max_dist * max_dist)) {
      return std::nullopt;
    }
    if (!best_segment) {
      return Hit{points_[best_k], {}, false};
    }
    const std::size_t k = best_k;
    const bool run_start = !(k > 0 && linked_next_[k - 1]);
    const bool run_end = !(k + 1 < linked_next_.size() && linked_next_[k + 1]);
    if ((best_t < 0.0 && run_start) || (best_t > 1.0 && run_end)) {
      return std::nullopt;
    }
    const double tc = std::clamp(best_t, 0.0, 1.0);
    return Hit{points_[k] + tc * (points_[k + 1] - points_[k]), blended_normal(k, tc),
               tc == best_t};
  }

 private:
  // Unit normal at each return from a total-least-squares line through its
  // neighbours in the same run; isolated returns keep a zero normal.
  void estimate_normals(int half_window) {
    const std::size_t n = points_.size();
    normals_.assign(n, Vec2{});
    std::vector<std::size_t> run_start(n), run_end(n);
    for (std::size_t k = 0; k < n; ++k) {
      run_start[k] = k > 0 && linked_next_[k - 1] ? run_start[k - 1] : k;
    }
    for (std::size_t k = n; k-- > 0;) {
      run_end[k] = linked_next_[k] ? run_end[k + 1] : k;
    }
    const auto h = static_cast<std::size_t>(std::max(1, half_window));
    for (std::size_t k = 0; k < n; ++k) {
      if (run_start[k] == run_end[k]) continue;
      const std::size_t lo = k - std::min(h, k - run_start[k]);
      const std::size_t hi = std::min(k + h, run_end[k]);
      Vec2 mean{};
      for (std::size_t q = lo; q <= hi; ++q) mean = mean + points_[q];
      mean = (1.0 / static_cast<double>(hi - lo + 1)) * mean;
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (std::size_t q = lo; q <= hi; ++q) {
        const Vec2 d = points_[q] - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
      }
      // Direction of largest spread; the normal is perpendicular to it.
      const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
      Vec2 normal{-std::sin(angle), std::cos(angle)};
      // Face the sensor so blending neighbours never cancels out.
      if (normal.x * points_[k].x + normal.y * points_[k].y > 0.0) {
        normal = -1.0 * normal;
      }
      normals_[k] = normal;
    }
  }

  Vec2 blended_normal(std::size_t k, double t) const {
    const Vec2 n = (1.0 - t) * normals_[k] + t * normals_[k + 1];
    const double len = n.norm();
    if (len > 1e-9) return (1.0 / len) * n;
    const Vec2 ab = points_[k + 1] - points_[k];
    const double ab_len = ab.norm();
    return {-ab.y / ab_len, ab.x / ab_len};
  }

  // Bucket coordinates, clamped so far-away queries stay representable.
  int cx(double x) const {
    return static_cast<int>(std::clamp(std::floor((x - lo_.x) / bucket_), -1.0, double(nx_)));
  }
  int cy(double y) const {
    return static_cast<int>(std::clamp(std::floor((y - lo_.y) / bucket_), -1.0, double(ny_)));
  }

  double bucket_ = 1.0;
  Vec2 lo_{};
  int nx_ = 0;
  int ny_ = 0;
  std::vector<Vec2> points_;
  std::vector<bool> linked_next_;
  std::vector<Vec2> normals_;
  std::vector<std::vector<std::uint32_t>> cells_;
};

constexpr double kCoarseEps = 1e-4;

struct Match {
  Vec2 source;  // transformed current point
  Vec2 target;
  Vec2 normal;
  bool on_segment;
  double residual;
};

struct Matches {
  std::vector<Match> pairs;
  double mean_residual = 0.0;
};

// Matches the transformed current points and keeps the best `keep_fraction`
// of them by residual (trimmed least squares).
Matches correspond(const SurfaceModel& model, const std::vector<Vec2>& points,
                   const Pose& transform, double max_dist, double keep_fraction) {
  Matches m;
  m.pairs.reserve(points.size());
  for (const Vec2& p : points) {
    const Vec2 q = transform.position() + rotate(p, transform.theta);
    if (const auto hit = model.match(q, max_dist)) {
      m.pairs.push_back({q, hit->point, hit->normal, hit->on_segment, distance(q, hit->point)});
    }
  }
  const auto keep = static_cast<std::size_t>(
      std::ceil(keep_fraction * static_cast<double>(m.pairs.size())));
  std::stable_sort(m.pairs.begin(), m.pairs.end(),
                   [](const Match& a, const Match& b) { return a.residual < b.residual; });
  m.pairs.resize(keep);
  double total = 0.0;
  for (const Match& pr : m.pairs) total += pr.residual;
  if (!m.pairs.empty()) {
    m.mean_residual = total / static_cast<double>(m.pairs.size());
  }
  return m;
}

// One Gauss-Newton step on point-to-line residuals (point-to-point for
// endpoint matches), applied on the left of `transform`. Residuals are
// weighted by their own rms spread and a Gaussian prior pulls toward
// `anchor`, so directions the scene leaves unconstrained (a single flat
// wall, say) stay at the initial guess.
Pose solve_increment(const Matches& m, const Pose& transform, const Pose& anchor,
                     const IcpParams& params, double prior_sigma_translation) {
  double h[3][3] = {};
  double g[3] = {};
  auto add_row = [&](const double (&j)[3], double r, double w) {
    for (int a = 0; a < 3; ++a) {
      g[a] += w * j[a] * r;
      for (int b = 0; b < 3; ++b) h[a][b] += w * j[a] * j[b];
    }
  };
  double sq = 0.0;
  for (const Match& pr : m.pairs) sq += pr.residual * pr.residual;
  const double spread = std::max(params.min_residual_sigma,
                                 std::sqrt(sq / static_cast<double>(m.pairs.size())));
  const double sigma = params.residual_inflation * spread;
  const double w = 1.0 / (sigma * sigma);
  for (const Match& pr : m.pairs) {
    const Vec2 e = pr.source - pr.target;
    const Vec2 perp{-pr.source.y, pr.source.x};  // d(source)/d(angle)
    if (pr.on_segment) {
      const double j[3] = {pr.normal.x, pr.normal.y, pr.normal.x * perp.x + pr.normal.y * perp.y};
      add_row(j, pr.normal.x * e.x + pr.normal.y * e.y, w);
    } else {
      const double jx[3] = {1.0, 0.0, perp.x};
      const double jy[3] = {0.0, 1.0, perp.y};
      add_row(jx, e.x, w);
      add_row(jy, e.y, w);
    }
  }
  // Prior rows, linearized the same way: the translation moves by d + dθ·perp(t).
  const Vec2 et = transform.position() - anchor.position();
  const Vec2 tp{-transform.y, transform.x};
  const double px[3] = {1.0, 0.0, tp.x};
  const double py[3] = {0.0, 1.0, tp.y};
  const double pr[3] = {0.0, 0.0, 1.0};
  const double wt = 1.0 / (prior_sigma_translation * prior_sigma_translation);
  const double wr = 1.0 / (params.prior_sigma_rotation * params.prior_sigma_rotation);
  add_row(px, et.x, wt);
  add_row(py, et.y, wt);
  add_row(pr, wrap_angle(transform.theta - anchor.theta), wr);

  // Solve h·x = -g by Cramer's rule; h is symmetric positive definite thanks
  // to the prior rows.
  auto det3 = [](const double (&a)[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double det = det3(h);
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw IcpError("icp: singular normal equations");
  }
  double x[3];
  for (int c = 0; c < 3; ++c) {
    double hc[3][3];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) hc[a][b] = b == c ? -g[a] : h[a][b];
    }
    x[c] = det3(hc) / det;
  }
  return {x[0], x[1], x[2]};
}

}  // namespace

IcpResult icp_estimate(const DepthScan& scan_prev, const DepthScan& scan_cur,
                       const Egomotion& init, const IcpParams& params, Action action) {
  const double prior_sigma_translation =
      action == Action::MoveForward ? params.prior_sigma_forward : params.prior_sigma_turn;
  const double coarsest =
      std::max(params.initial_correspondence_dist, params.max_correspondence_dist);
  SurfaceModel model(scan_prev, params.normal_half_window);
  const std::vector<Vec2> points = scan_to_points(scan_cur);
  if (model.empty() || static_cast<int>(points.size()) < params.min_inliers) {
    throw IcpError("icp: not enough returns to match");
  }
  auto matched = [&](const Pose& transform, double gate) {
    Matches m = correspond(model, points, transform, gate, params.trim_fraction);
    if (static_cast<int>(m.pairs.size()) < params.min_inliers) {
      throw IcpError("icp: too few correspondences (" +
                     std::to_string(m.pairs.size()) + ")");
    }
    return m;
  };

  // The gate halves from `coarsest` down to max_correspondence_dist. Shrinking
  // the gate only drops the largest residuals, so the recorded mean residual
  // never increases across stages either.
  IcpResult result;
  const Pose anchor = to_pose(init);
  Pose transform = anchor;
  double gate = coarsest;
  model.build_index(gate);
  Matches matches = matched(transform, gate);
  result.residuals.push_back(matches.mean_residual);
  for (;;) {
    const bool final_stage = gate <= params.max_correspondence_dist;
    const double eps_t = final_stage ? params.eps_translation : kCoarseEps;
    const double eps_r = final_stage ? params.eps_rotation : kCoarseEps;
    while (result.iterations < params.max_iterations) {
      const Pose delta = solve_increment(matches, transform, anchor, params,
                                         prior_sigma_translation);
      const Pose candidate = compose(delta, transform);
      Matches next = matched(candidate, gate);
      if (next.mean_residual > matches.mean_residual) {
        break;  // no further improvement at this gate
      }
      transform = candidate;
      matches = std::move(next);
      result.residuals.push_back(matches.mean_residual);
      ++result.iterations;
      if (std::hypot(delta.x, delta.y) < eps_t && std::abs(delta.theta) < eps_r) {
        break;
      }
    }
    if (final_stage || result.iterations >= params.max_iterations) {
      result.converged = final_stage && result.iterations < params.max_iterations;
      break;
    }
    gate = std::max(gate / 2.0, params.max_correspondence_dist);
    model.build_index(gate);
    matches = matched(transform, gate);
    result.residuals.push_back(matches.mean_residual);
  }
  result.egomotion = to_egomotion(transform);
  result.inliers = static_cast<int>(matches.pairs.size());
  return result;
}

// ---------------------------------------------------------------------------
// Estimators

namespace {

bool within_step_bounds(const Egomotion& e) {
  return is_finite(e) && std::abs(e.ex) <= 1.0 && std::abs(e.ey) <= 1.0 &&
         std::abs(e.etheta) <= kPi;
}

EstimateResult icp_or_fallback(const IcpParams& params, const DepthScan& prev,
                               const DepthScan& cur, Action action) {
  const Egomotion nominal = nominal_motion(action);
  try {
    const DepthScan p = params.median_window > 1 && prev.n_rays() >= params.median_window
                            ? median_filter(prev, params.median_window)
                            : prev;
    const DepthScan c = params.median_window > 1 && cur.n_rays() >= params.median_window
                            ? median_filter(cur, params.median_window)
                            : cur;
    const Egomotion e = icp_estimate(p, c, nominal, params, action).egomotion;
    const bool plausible =
        within_step_bounds(e) &&
        std::hypot(e.ex - nominal.ex, e.ey - nominal.ey) <= params.max_deviation_translation &&
        std::abs(wrap_angle(e.etheta - nominal.etheta)) <= params.max_deviation_rotation;
    if (plausible) {
      return {e, false};
    }
  } catch (const IcpError&) {
  }
  return {nominal, true};
}

Egomotion average(const Egomotion& a, const Egomotion& b) {
  return {(a.ex + b.ex) / 2.0, (a.ey + b.ey) / 2.0,
          wrap_angle(a.etheta + wrap_angle(b.etheta - a.etheta) / 2.0)};
}

}  // namespace

EstimateResult estimate(const EstimatorKind& kind, const DepthScan& scan_prev,
                        const DepthScan& scan_cur, Action action,
                        const std::optional<Egomotion>& gt, RngStream* rng) {
  const Egomotion nominal = nominal_motion(action);  // rejects STOP
  switch (kind.type) {
    case EstimatorKind::Type::GroundTruth:
      if (!gt) throw std::invalid_argument("ground_truth estimator needs ground truth");
      return {*gt, false};
    case EstimatorKind::Type::DeadReckon:
      return {nominal, false};
    case EstimatorKind::Type::NoisyOracle: {
      if (!gt) throw std::invalid_argument("noisy_oracle estimator needs ground truth");
      if (kind.sigma_translation == 0.0 && kind.sigma_rotation == 0.0) {
        return {*gt, false};
      }
      if (rng == nullptr) throw std::invalid_argument("noisy_oracle estimator needs an rng");
      return {{gt->ex + rng->normal(kind.sigma_translation),
               gt->ey + rng->normal(kind.sigma_translation),
               wrap_angle(gt->etheta + rng->normal(kind.sigma_rotation))},
              false};
    }
    case EstimatorKind::Type::Icp: {
      EstimateResult direct = icp_or_fallback(kind.icp, scan_prev, scan_cur, action);
      if (!kind.flip_average) {
        return direct;
      }
      const EstimateResult flipped =
          icp_or_fallback(kind.icp, mirror_scan(scan_prev), mirror_scan(scan_cur),
                          pointnav::mirrored(action));
      if (direct.fallback || flipped.fallback) {
        return direct.fallback ? EstimateResult{mirror_egomotion(flipped.egomotion),
                                                flipped.fallback}
                               : direct;
      }
      return {average(direct.egomotion, mirror_egomotion(flipped.egomotion)), false};
    }
  }
  return {nominal, true};
}

// ---------------------------------------------------------------------------
// Augmentations

DepthScan mirror_scan(const DepthScan& scan) {
  DepthScan out = scan;
  std::reverse(out.ranges.begin(), out.ranges.end());
  return out;
}

Egomotion mirror_egomotion(const Egomotion& e) {
  return {e.ex, -e.ey, e.etheta == kPi ? kPi : -e.etheta};
}

VOTuple flip_tuple(const VOTuple& t) {
  return {mirror_scan(t.scan_prev), mirror_scan(t.scan_cur), mirrored(t.action),
          mirror_egomotion(t.egomotion_gt)};
}

VOTuple swap_tuple(const VOTuple& t) {
  if (t.action != Action::TurnLeft && t.action != Action::TurnRight) {
    throw std::invalid_argument(
        "swap is defined for turns only: a time-reversed " +
        std::string(to_string(t.action)) + " has no action label");
  }
  return {t.scan_cur, t.scan_prev, mirrored(t.action), inverse(t.egomotion_gt)};
}

}  // namespace pointnav
