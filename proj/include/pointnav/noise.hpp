#pragma once

/// \file
/// \brief Actuation and sensor noise, seeded per (run, episode, stream).

#include <cstdint>
#include <random>
#include <string>

#include "pointnav/action.hpp"
#include "pointnav/geometry.hpp"
#include "pointnav/gridworld.hpp"

namespace pointnav {

inline constexpr double kForwardStep = 0.25;
inline constexpr double kTurnAngle = kPi / 6.0;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

/// Noise of one action. Random parts are Gaussians truncated at +-3 sigma.
struct ActionNoise {
  double sigma_along = 0.0;  ///< m, along the heading
  double sigma_cross = 0.0;  ///< m, to the left
  double sigma_yaw = 0.0;    ///< rad
  double bias_along = 0.0;   ///< m
  double bias_yaw = 0.0;     ///< rad, in the turn direction for turns
};

struct ActuationNoiseConfig {
  ActionNoise forward{0.12, 0.12, deg_to_rad(6.0), 0.0, 0.0};
  ActionNoise turn_left{0.03, 0.03, deg_to_rad(7.0), 0.0, 0.0};
  ActionNoise turn_right{0.03, 0.03, deg_to_rad(7.0), 0.0, 0.0};

  static ActuationNoiseConfig none() { return {{}, {}, {}}; }
  const ActionNoise& for_action(Action a) const;
  /// Throws std::invalid_argument for negative sigmas or steps that could
  /// leave the single-step egomotion bounds.
  void validate() const;
};

struct SensorNoiseConfig {
  double mult_sigma = 0.01;    ///< each range is scaled by (1 + N(0, mult_sigma))
  double dropout_prob = 0.0;   ///< probability a ray reads max_range

  static SensorNoiseConfig none() { return {0.0, 0.0}; }
  void validate() const;
};

/// 64-bit FNV-1a hash of the bytes of `s`.
std::uint64_t fnv1a(std::string_view s);

/// 64-bit seed mixed from the three identifying fields. Pure function.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view episode_id,
                          std::string_view stream_label);

/// Random stream owned by one episode execution. Its state depends only on the
/// identifying triple, never on scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t global_seed, std::string episode_id,
            std::string stream_label);

  std::uint64_t global_seed() const { return global_seed_; }
  const std::string& episode_id() const { return episode_id_; }
  const std::string& stream_label() const { return stream_label_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal(double sigma);
  /// N(0, sigma) truncated to [-k sigma, k sigma]; 0 without a draw if sigma is 0.
  double truncated_normal(double sigma, double k = 3.0);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t global_seed_;
  std::string episode_id_;
  std::string stream_label_;
  std::mt19937_64 engine_;
};

/// Noise-free motion of an action. Throws std::invalid_argument for STOP.
Egomotion nominal_motion(Action a);

Egomotion sample_actuation(Action a, const ActuationNoiseConfig& cfg,
                           RngStream& rng);

DepthScan corrupt_scan(const DepthScan& scan, const SensorNoiseConfig& cfg,
                       RngStream& rng);

/// Sliding median over `window` rays, edge rays replicated at the borders.
/// Throws std::invalid_argument for even, zero, or oversized windows.
DepthScan median_filter(const DepthScan& scan, int window);

}  // namespace pointnav
