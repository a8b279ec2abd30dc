#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pointnav/agent.hpp"
#include "pointnav/odometry.hpp"
#include "support.hpp"

using namespace pointnav;
using testing::Rand;

namespace {

constexpr double kRadius = 0.18;

// Noise-free scan pair around one collision-truncated motion.
struct Pair {
  DepthScan prev, cur;
  Egomotion truth;
};

Pair synthesize(const OccupancyGrid& g, const Pose& pose, const Egomotion& e) {
  const MoveResult m = translate_with_collision(g, pose, {e.ex, e.ey}, kRadius);
  const Egomotion real{e.ex * m.fraction, e.ey * m.fraction, e.etheta};
  const ScanGeometry geo;
  return {render_scan(g, pose, geo), render_scan(g, apply_egomotion(pose, real), geo), real};
}

Pair synthesize(const OccupancyGrid& g, const Pose& pose, Action a, RngStream& rng) {
  return synthesize(g, pose, sample_actuation(a, ActuationNoiseConfig{}, rng));
}

bool recovered(const Egomotion& got, const Egomotion& want, double tol) {
  return std::hypot(got.ex - want.ex, got.ey - want.ey) <= tol &&
         std::abs(wrap_angle(got.etheta - want.etheta)) <= tol;
}

// The grid reflected top to bottom; world y maps to height - y.
OccupancyGrid mirrored_grid(const OccupancyGrid& g) {
  std::vector<std::uint8_t> cells(g.cell_count());
  for (int j = 0; j < g.height(); ++j) {
    for (int i = 0; i < g.width(); ++i) {
      cells[g.index(i, g.height() - 1 - j)] = g.occupied(i, j) ? 1 : 0;
    }
  }
  return OccupancyGrid(g.width(), g.height(), g.cell_size(), std::move(cells));
}

VOTuple random_tuple(Rand& rng, Action a) {
  VOTuple t;
  t.action = a;
  t.scan_prev.ranges.resize(8);
  t.scan_cur.ranges.resize(8);
  for (double& r : t.scan_prev.ranges) r = rng.uniform(0.1, 10.0);
  for (double& r : t.scan_cur.ranges) r = rng.uniform(0.1, 10.0);
  t.egomotion_gt = {rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1), rng.uniform(-1.0, 1.0)};
  return t;
}

}  // namespace

TEST_CASE("estimate: trivial kinds") {
  const DepthScan empty;
  const Egomotion gt{0.21, -0.02, 0.03};
  RngStream rng(1, "e", "estimator");
  CHECK(estimate(EstimatorKind::ground_truth(), empty, empty, Action::MoveForward, gt, nullptr)
            .egomotion == gt);
  const EstimateResult dr =
      estimate(EstimatorKind::dead_reckon(), empty, empty, Action::MoveForward, gt, nullptr);
  CHECK(dr.egomotion == Egomotion{0.25, 0.0, 0.0});
  CHECK_FALSE(dr.fallback);
  CHECK(estimate(EstimatorKind::noisy_oracle(0.0, 0.0), empty, empty, Action::TurnLeft, gt,
                 nullptr)
            .egomotion == gt);
  const Egomotion noisy =
      estimate(EstimatorKind::noisy_oracle(0.01, 0.01), empty, empty, Action::TurnLeft, gt, &rng)
          .egomotion;
  CHECK(noisy != gt);
  CHECK(std::abs(noisy.ex - gt.ex) < 0.1);

  CHECK_THROWS_AS(estimate(EstimatorKind::dead_reckon(), empty, empty, Action::Stop, gt, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate(EstimatorKind::ground_truth(), empty, empty, Action::MoveForward,
                           std::nullopt, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate(EstimatorKind::noisy_oracle(0.1, 0.1), empty, empty,
                           Action::MoveForward, gt, nullptr),
                  std::invalid_argument);
}

TEST_CASE("scan_to_points") {
  DepthScan all_max;
  all_max.ranges.assign(16, all_max.max_range);
  CHECK(scan_to_points(all_max).empty());

  DepthScan one;
  one.fov = 0.0;
  one.ranges = {2.0};
  const std::vector<Vec2> p = scan_to_points(one);
  REQUIRE(p.size() == 1);
  CHECK(p[0].x == doctest::Approx(2.0));
  CHECK(p[0].y == doctest::Approx(0.0));

  DepthScan mixed;
  mixed.ranges = {1.0, 10.0, 2.0, 3.0, 10.0};
  const std::vector<Vec2> q = scan_to_points(mixed);
  CHECK(q.size() == 3);
  // Ray 0 is the rightmost.
  CHECK(q[0].y < 0.0);
  CHECK(q[0].x == doctest::Approx(std::cos(kPi / 4)));
}

TEST_CASE("icp: identical scans give identity") {
  const OccupancyGrid g = testing::cluttered_map(5);
  Rand rng(50);
  for (int k = 0; k < 20; ++k) {
    const DepthScan s = render_scan(g, testing::random_free_pose(g, rng, kRadius), {});
    const IcpResult r = icp_estimate(s, s, {}, IcpParams{});
    CHECK(std::abs(r.egomotion.ex) < 1e-9);
    CHECK(std::abs(r.egomotion.ey) < 1e-9);
    CHECK(std::abs(r.egomotion.etheta) < 1e-9);
  }
}

TEST_CASE("icp recovers noiseless motion from the nominal guess") {
  const OccupancyGrid g = testing::cluttered_map(6);
  Rand rng(60);
  RngStream act(60, "icp", "actuation");
  int ok = 0, free = 0, truncated_ok = 0, truncated = 0, from_truth = 0, from_nominal = 0, nominal_only = 0, total = 0;
  const auto estimate = [](const Pair& p, const Egomotion& init, Action a) {
    try {
      return icp_estimate(p.prev, p.cur, init, IcpParams{}, a).egomotion;
    } catch (const IcpError&) {
      return init;
    }
  };
  for (int k = 0; k < 100; ++k) {
    const Pose pose = testing::random_free_pose(g, rng, kRadius);
    for (Action a : kMotionActions) {
      ++total;
      // Commanded motion only, cut short by any collision.
      const Pair exact = synthesize(g, pose, nominal_motion(a));
      const bool hit = recovered(estimate(exact, nominal_motion(a), a), exact.truth, 1e-3);
      if (exact.truth == nominal_motion(a)) {
        ++free;
        ok += hit ? 1 : 0;
      } else {
        // A forward step cut short facing an oblique wall leaves the slide
        // along it unobservable, so these are only counted.
        truncated_ok += hit ? 1 : 0;
        ++truncated;
      }

      // Noisy actuation: exact from the true motion, and never worse than the
      // guess by more than a millimetre from the nominal one.
      const Pair noisy = synthesize(g, pose, a, act);
      from_truth += recovered(estimate(noisy, noisy.truth, a), noisy.truth, 1e-3) ? 1 : 0;
      const Egomotion got = estimate(noisy, nominal_motion(a), a);
      from_nominal += recovered(got, noisy.truth, 1e-3) ? 1 : 0;
      const Egomotion guess = nominal_motion(a);
      const double err = std::hypot(got.ex - noisy.truth.ex, got.ey - noisy.truth.ey);
      const double err0 = std::hypot(guess.ex - noisy.truth.ex, guess.ey - noisy.truth.ey);
      nominal_only += err <= err0 + 1e-3 ? 1 : 0;
    }
  }
  MESSAGE("exact " << ok << "/" << free << ", truncated " << truncated_ok << "/" << truncated
                   << ", noisy from truth " << from_truth
                   << ", noisy from nominal " << from_nominal);
  CHECK(ok >= 0.99 * free);
  CHECK(from_truth >= 0.99 * total);
  CHECK(nominal_only >= 0.95 * total);

  // The hand examples: exact nominal motions.
  const Pose pose = testing::random_free_pose(g, rng, 1.0);
  const ScanGeometry geo;
  const DepthScan s0 = render_scan(g, pose, geo);
  const DepthScan fwd = render_scan(g, apply_egomotion(pose, {0.25, 0, 0}), geo);
  const DepthScan turn = render_scan(g, apply_egomotion(pose, {0, 0, kPi / 6}), geo);
  CHECK(recovered(icp_estimate(s0, fwd, {0.25, 0, 0}, {}, Action::MoveForward).egomotion,
                  {0.25, 0, 0}, 1e-3));
  CHECK(recovered(icp_estimate(s0, turn, {0, 0, kPi / 6}, {}, Action::TurnLeft).egomotion,
                  {0, 0, kPi / 6}, 1e-3));
}

TEST_CASE("icp residual never increases") {
  const OccupancyGrid g = testing::cluttered_map(8);
  Rand rng(80);
  RngStream act(80, "icp", "actuation");
  RngStream sens(80, "icp", "sensor");
  int runs = 0;
  for (int k = 0; k < 300; ++k) {
    const Pose pose = testing::random_free_pose(g, rng, kRadius);
    const Action a = kMotionActions[static_cast<std::size_t>(k % 3)];
    Pair p = synthesize(g, pose, a, act);
    if (k % 2 == 1) {
      p.prev = corrupt_scan(p.prev, {0.01, 0.0}, sens);
      p.cur = corrupt_scan(p.cur, {0.01, 0.0}, sens);
    }
    try {
      const IcpResult r = icp_estimate(p.prev, p.cur, nominal_motion(a), {}, a);
      REQUIRE(!r.residuals.empty());
      for (std::size_t i = 1; i < r.residuals.size(); ++i) {
        REQUIRE(r.residuals[i] <= r.residuals[i - 1]);
      }
      ++runs;
    } catch (const IcpError&) {
    }
  }
  CHECK(runs > 250);
}

TEST_CASE("icp failure falls back to the nominal motion") {
  DepthScan blank;
  blank.ranges.assign(128, blank.max_range);
  CHECK_THROWS_AS(icp_estimate(blank, blank, {}, IcpParams{}), IcpError);
  const EstimateResult r = estimate(EstimatorKind::icp_matcher(), blank, blank,
                                    Action::TurnRight, std::nullopt, nullptr);
  CHECK(r.fallback);
  CHECK(r.egomotion == nominal_motion(Action::TurnRight));

  IcpParams bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(EstimatorKind::icp_matcher(bad).validate(), std::invalid_argument);
  bad = {};
  bad.eps_rotation = 0.0;
  CHECK_THROWS_AS(EstimatorKind::icp_matcher(bad).validate(), std::invalid_argument);
  CHECK_THROWS_AS(EstimatorKind::noisy_oracle(-1.0, 0.0).validate(), std::invalid_argument);
}

TEST_CASE("every estimator stays within step bounds or flags a fallback") {
  const OccupancyGrid g = testing::cluttered_map(9);
  Rand rng(90);
  RngStream act(90, "bounds", "actuation");
  RngStream sens(90, "bounds", "sensor");
  EstimatorKind flip = EstimatorKind::icp_matcher();
  flip.flip_average = true;
  for (int k = 0; k < 200; ++k) {
    const Pose pose = testing::random_free_pose(g, rng, kRadius);
    const Action a = kMotionActions[static_cast<std::size_t>(k % 3)];
    Pair p = synthesize(g, pose, a, act);
    p.prev = corrupt_scan(p.prev, {0.02, 0.05}, sens);
    p.cur = corrupt_scan(p.cur, {0.02, 0.05}, sens);
    for (const EstimatorKind& kind : {EstimatorKind::icp_matcher(), flip}) {
      const EstimateResult r = estimate(kind, p.prev, p.cur, a, p.truth, nullptr);
      REQUIRE(is_finite(r.egomotion));
      REQUIRE(std::abs(r.egomotion.ex) <= 1.0);
      REQUIRE(std::abs(r.egomotion.ey) <= 1.0);
      if (r.fallback) REQUIRE(r.egomotion == nominal_motion(a));
    }
  }
}

TEST_CASE("flip_tuple") {
  Rand rng(100);
  for (int k = 0; k < 10000; ++k) {
    const VOTuple t = random_tuple(rng, kMotionActions[static_cast<std::size_t>(k % 3)]);
    REQUIRE(flip_tuple(flip_tuple(t)) == t);
  }
  VOTuple fwd = random_tuple(rng, Action::MoveForward);
  fwd.egomotion_gt = {0.24, 0.01, 0.02};
  const VOTuple f = flip_tuple(fwd);
  CHECK(f.action == Action::MoveForward);
  CHECK(f.egomotion_gt == Egomotion{0.24, -0.01, -0.02});
  CHECK(f.scan_prev.ranges.front() == fwd.scan_prev.ranges.back());

  VOTuple turn = random_tuple(rng, Action::TurnLeft);
  turn.egomotion_gt = {0, 0, kPi / 6};
  const VOTuple ft = flip_tuple(turn);
  CHECK(ft.action == Action::TurnRight);
  CHECK(ft.egomotion_gt.etheta == -kPi / 6);
}

TEST_CASE("flip matches simulating the mirrored world") {
  const OccupancyGrid g = testing::cluttered_map(11);
  const OccupancyGrid m = mirrored_grid(g);
  const double height = g.height() * g.cell_size();
  Rand rng(110);
  RngStream act(110, "mirror", "actuation");
  for (int k = 0; k < 50; ++k) {
    const Pose pose = testing::random_free_pose(g, rng, kRadius);
    const Action a = kMotionActions[static_cast<std::size_t>(k % 3)];
    const Pair p = synthesize(g, pose, a, act);
    const VOTuple flipped = flip_tuple({p.prev, p.cur, a, p.truth});

    const Pose mpose{pose.x, height - pose.y, -pose.theta};
    const Egomotion mtruth{p.truth.ex, -p.truth.ey, -p.truth.etheta};
    const DepthScan mprev = render_scan(m, mpose, {});
    const DepthScan mcur = render_scan(m, apply_egomotion(mpose, mtruth), {});
    CHECK(flipped.action == mirrored(a));
    CHECK(flipped.egomotion_gt.ex == mtruth.ex);
    CHECK(flipped.egomotion_gt.ey == mtruth.ey);
    CHECK(flipped.egomotion_gt.etheta == mtruth.etheta);
    for (int r = 0; r < mprev.n_rays(); ++r) {
      REQUIRE(std::abs(flipped.scan_prev.ranges[r] - mprev.ranges[r]) < 1e-9);
      REQUIRE(std::abs(flipped.scan_cur.ranges[r] - mcur.ranges[r]) < 1e-6);
    }
  }
}

TEST_CASE("flip commutes with composition") {
  Rand rng(120);
  for (int k = 0; k < 10000; ++k) {
    const int n = rng.integer(1, 6);
    Pose plain{}, mirrored_chain{};
    for (int s = 0; s < n; ++s) {
      const Egomotion e{rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1), rng.uniform(-0.7, 0.7)};
      plain = compose(plain, to_pose(e));
      mirrored_chain = compose(mirrored_chain, to_pose(mirror_egomotion(e)));
    }
    const Egomotion want = mirror_egomotion(to_egomotion(plain));
    REQUIRE(std::abs(mirrored_chain.x - want.ex) < 1e-9);
    REQUIRE(std::abs(mirrored_chain.y - want.ey) < 1e-9);
    REQUIRE(std::abs(wrap_angle(mirrored_chain.theta - want.etheta)) < 1e-9);
  }
}

TEST_CASE("swap_tuple") {
  Rand rng(130);
  for (int k = 0; k < 10000; ++k) {
    const VOTuple t = random_tuple(rng, k % 2 ? Action::TurnLeft : Action::TurnRight);
    const VOTuple s = swap_tuple(t);
    REQUIRE(s.scan_prev == t.scan_cur);
    REQUIRE(s.action == mirrored(t.action));
    const Pose id = compose(to_pose(t.egomotion_gt), to_pose(s.egomotion_gt));
    REQUIRE(std::abs(id.x) <= 1e-12);
    REQUIRE(std::abs(id.y) <= 1e-12);
    REQUIRE(std::abs(id.theta) <= 1e-12);
    const VOTuple back = swap_tuple(s);
    REQUIRE(back.scan_prev == t.scan_prev);
    REQUIRE(back.action == t.action);
    REQUIRE(std::abs(back.egomotion_gt.ex - t.egomotion_gt.ex) <= 1e-12);
    REQUIRE(std::abs(back.egomotion_gt.ey - t.egomotion_gt.ey) <= 1e-12);
    REQUIRE(std::abs(back.egomotion_gt.etheta - t.egomotion_gt.etheta) <= 1e-12);
  }
  VOTuple turn = random_tuple(rng, Action::TurnLeft);
  turn.egomotion_gt = {0, 0, kPi / 6};
  CHECK(swap_tuple(turn).egomotion_gt.etheta == -kPi / 6);
  CHECK(swap_tuple(turn).action == Action::TurnRight);

  try {
    swap_tuple(random_tuple(rng, Action::MoveForward));
    FAIL("forward swap must be rejected");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("MOVE_FORWARD") != std::string::npos);
  }
}

TEST_CASE("dead reckoning drifts at least as much as icp") {
  // Open-loop random walks of 100 noisy steps; final pose error per estimator.
  const OccupancyGrid g = testing::cluttered_map(12);
  Rand rng(140);
  SimConfig sim;
  std::vector<double> dr_err, icp_err;
  const EstimatorKind icp = EstimatorKind::icp_matcher();
  for (int ep = 0; ep < 200; ++ep) {
    const std::string id = "walk-" + std::to_string(ep);
    RngStream act(140, id, "actuation"), sens(140, id, "sensor");
    AgentState s;
    s.pose_true = testing::random_free_pose(g, rng, kRadius);
    Pose dr = s.pose_true, est = s.pose_true;
    DepthScan prev = corrupt_scan(render_scan(g, s.pose_true, sim.scan), sim.sensor, sens);
    for (int k = 0; k < 100; ++k) {
      const double u = rng.uniform(0, 1);
      const Action a = u < 0.6 ? Action::MoveForward : u < 0.8 ? Action::TurnLeft
                                                                 : Action::TurnRight;
      const StepOutcome out = step(g, s, a, sim, act, sens, true);
      dr = apply_egomotion(dr, nominal_motion(a));
      est = apply_egomotion(est, estimate(icp, prev, *out.scan, a, std::nullopt, nullptr).egomotion);
      prev = *out.scan;
      s = out.state;
    }
    dr_err.push_back(distance(dr.position(), s.pose_true.position()));
    icp_err.push_back(distance(est.position(), s.pose_true.position()));
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  const double dr_med = median(dr_err), icp_med = median(icp_err);
  MESSAGE("median final error: dead reckoning " << dr_med << " m, icp " << icp_med << " m");
  CHECK(dr_med >= icp_med);
}
