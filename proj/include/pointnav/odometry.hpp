#pragma once

/// \file
/// \brief Egomotion estimators and VO-tuple label transforms.
///
/// Every estimator sits behind `estimate`, the same slot a learned visual
/// odometry model would occupy: two consecutive scans plus the action in,
/// one Egomotion out.

#include <optional>
#include <stdexcept>
#include <vector>

#include "pointnav/action.hpp"
#include "pointnav/geometry.hpp"
#include "pointnav/gridworld.hpp"
#include "pointnav/noise.hpp"

namespace pointnav {

struct IcpParams {
  int max_iterations = 100;
  double eps_translation = 1e-7;  ///< m
  double eps_rotation = 1e-7;     ///< rad
  double max_correspondence_dist = 0.3;
  /// Gate of the first, coarsest matching stage; halved down to the above.
  double initial_correspondence_dist = 1.2;
  int min_inliers = 12;
  /// Fraction of matches (lowest residuals) used for each fit.
  double trim_fraction = 0.9;
  /// Spread of the initial guess per axis, matching the default actuation
  /// noise: translation for forward steps and for turns (m), and yaw (rad).
  double prior_sigma_forward = 0.12;
  double prior_sigma_turn = 0.03;
  double prior_sigma_rotation = deg_to_rad(7.0);
  /// Neighbours on each side used to estimate surface normals.
  int normal_half_window = 3;
  /// Floor on the per-point residual spread used to weight matches (m).
  double min_residual_sigma = 0.002;
  /// Matches are weighted as if their spread were this multiple of the rms
  /// residual: neighbouring residuals share one noisy reference surface and
  /// are far from independent.
  double residual_inflation = 4.0;
  int median_window = 3;          ///< applied to both scans before matching
  /// Results further than this from the nominal motion count as divergence.
  double max_deviation_translation = 0.55;
  double max_deviation_rotation = 0.4;
};

struct EstimatorKind {
  enum class Type { GroundTruth, DeadReckon, NoisyOracle, Icp };

  Type type = Type::GroundTruth;
  double sigma_translation = 0.0;  ///< noisy_oracle, m
  double sigma_rotation = 0.0;     ///< noisy_oracle, rad
  IcpParams icp;
  /// Average with the un-flipped estimate on mirrored inputs.
  bool flip_average = false;

  static EstimatorKind ground_truth() { return {}; }
  static EstimatorKind dead_reckon() { return {Type::DeadReckon, 0.0, 0.0, {}, false}; }
  static EstimatorKind noisy_oracle(double sigma_t, double sigma_r) {
    return {Type::NoisyOracle, sigma_t, sigma_r, {}, false};
  }
  static EstimatorKind icp_matcher(IcpParams params = {}) {
    return {Type::Icp, 0.0, 0.0, params, false};
  }

  bool needs_scans() const { return type == Type::Icp; }
  void validate() const;
};

std::string_view to_string(EstimatorKind::Type t);
std::optional<EstimatorKind::Type> parse_estimator_type(std::string_view s);

struct EstimateResult {
  Egomotion egomotion;
  bool fallback = false;  ///< estimator failed; nominal motion was used
};

/// Throws std::invalid_argument for STOP, or when a ground-truth based kind
/// is given no ground truth (or noisy_oracle no rng).
EstimateResult estimate(const EstimatorKind& kind, const DepthScan& scan_prev,
                        const DepthScan& scan_cur, Action action,
                        const std::optional<Egomotion>& gt, RngStream* rng);

/// Agent-frame points of all returns (rays shorter than max_range).
std::vector<Vec2> scan_to_points(const DepthScan& scan);

class IcpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IcpResult {
  Egomotion egomotion;
  int iterations = 0;
  int inliers = 0;
  bool converged = false;
  /// Mean correspondence distance after each accepted iteration (index 0 is
  /// the initial guess). Non-increasing.
  std::vector<double> residuals;
};

/// Aligns scan_cur onto scan_prev starting from `init` and returns the pose of
/// the current frame in the previous one. Correspondences are nearest points
/// on the previous scan's surface polyline; each update is a Gauss-Newton
/// step on point-to-line distances with a Gaussian prior centred on `init`,
/// whose translation spread is chosen by `action`. Throws IcpError when fewer
/// than min_inliers correspondences survive.
IcpResult icp_estimate(const DepthScan& scan_prev, const DepthScan& scan_cur,
                       const Egomotion& init, const IcpParams& params,
                       Action action = Action::MoveForward);

/// One VO training sample.
struct VOTuple {
  DepthScan scan_prev;
  DepthScan scan_cur;
  Action action = Action::MoveForward;
  Egomotion egomotion_gt;
  friend bool operator==(const VOTuple&, const VOTuple&) = default;
};

DepthScan mirror_scan(const DepthScan& scan);
Egomotion mirror_egomotion(const Egomotion& e);

/// Mirror about the forward axis.
VOTuple flip_tuple(const VOTuple& t);

/// Time reversal. Only turns have a reversed action label; MOVE_FORWARD and
/// STOP throw std::invalid_argument.
VOTuple swap_tuple(const VOTuple& t);

}  // namespace pointnav
