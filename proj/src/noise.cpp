#include "pointnav/noise.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace pointnav {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_sigma(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be a finite value >= 0");
  }
}

}  // namespace

const ActionNoise& ActuationNoiseConfig::for_action(Action a) const {
  switch (a) {
    case Action::MoveForward: return forward;
    case Action::TurnLeft: return turn_left;
    case Action::TurnRight: return turn_right;
    case Action::Stop: break;
  }
  throw std::invalid_argument("STOP has no actuation noise");
}

void ActuationNoiseConfig::validate() const {
  for (Action a : kMotionActions) {
    const ActionNoise& n = for_action(a);
    check_sigma(n.sigma_along, "sigma_along");
    check_sigma(n.sigma_cross, "sigma_cross");
    check_sigma(n.sigma_yaw, "sigma_yaw");
    const Egomotion nominal = nominal_motion(a);
    const double along = std::abs(nominal.ex) + std::abs(n.bias_along) + 3.0 * n.sigma_along;
    const double cross = 3.0 * n.sigma_cross;
    const double yaw = std::abs(nominal.etheta) + std::abs(n.bias_yaw) + 3.0 * n.sigma_yaw;
    if (along > 1.0 || cross > 1.0 || yaw > kPi) {
      throw std::invalid_argument(std::string("actuation noise for ") +
                                  std::string(to_string(a)) +
                                  " exceeds single-step bounds");
    }
  }
}

void SensorNoiseConfig::validate() const {
  check_sigma(mult_sigma, "mult_sigma");
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
    throw std::invalid_argument("dropout_prob must lie in [0, 1]");
  }
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view episode_id,
                          std::string_view stream_label) {
  std::uint64_t h = splitmix64(global_seed);
  h = splitmix64(h ^ fnv1a(episode_id));
  h = splitmix64(h ^ fnv1a(stream_label));
  return h;
}

RngStream::RngStream(std::uint64_t global_seed, std::string episode_id,
                     std::string stream_label)
    : global_seed_(global_seed),
      episode_id_(std::move(episode_id)),
      stream_label_(std::move(stream_label)),
      engine_(derive_seed(global_seed_, episode_id_, stream_label_)) {}

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double RngStream::normal(double sigma) {
  if (sigma == 0.0) {
    return 0.0;
  }
  return std::normal_distribution<double>(0.0, sigma)(engine_);
}

double RngStream::truncated_normal(double sigma, double k) {
  if (sigma == 0.0) {
    return 0.0;
  }
  std::normal_distribution<double> dist(0.0, sigma);
  for (;;) {
    const double v = dist(engine_);
    if (std::abs(v) <= k * sigma) {
      return v;
    }
  }
}

Egomotion nominal_motion(Action a) {
  switch (a) {
    case Action::MoveForward: return {kForwardStep, 0.0, 0.0};
    case Action::TurnLeft: return {0.0, 0.0, kTurnAngle};
    case Action::TurnRight: return {0.0, 0.0, -kTurnAngle};
    case Action::Stop: break;
  }
  throw std::invalid_argument("STOP has no egomotion");
}

Egomotion sample_actuation(Action a, const ActuationNoiseConfig& cfg,
                           RngStream& rng) {
  const Egomotion nominal = nominal_motion(a);
  const ActionNoise& n = cfg.for_action(a);
  const double turn_sign = a == Action::TurnLeft ? 1.0 : a == Action::TurnRight ? -1.0 : 0.0;
  Egomotion e = nominal;
  e.ex += n.bias_along + rng.truncated_normal(n.sigma_along);
  e.ey += rng.truncated_normal(n.sigma_cross);
  e.etheta = wrap_angle(e.etheta + turn_sign * n.bias_yaw +
                        rng.truncated_normal(n.sigma_yaw));
  return e;
}

DepthScan corrupt_scan(const DepthScan& scan, const SensorNoiseConfig& cfg,
                       RngStream& rng) {
  DepthScan out = scan;
  constexpr double kMinRange = 1e-6;
  for (double& r : out.ranges) {
    if (cfg.dropout_prob > 0.0 && rng.uniform() < cfg.dropout_prob) {
      r = out.max_range;
      continue;
    }
    if (cfg.mult_sigma > 0.0) {
      r = std::clamp(r * (1.0 + rng.normal(cfg.mult_sigma)), kMinRange, out.max_range);
    }
  }
  return out;
}

DepthScan median_filter(const DepthScan& scan, int window) {
  const int n = scan.n_rays();
  if (window < 1 || window % 2 == 0 || window > n) {
    throw std::invalid_argument("median window must be odd and in [1, n_rays]");
  }
  if (window == 1) {
    return scan;
  }
  const int half = window / 2;
  DepthScan out = scan;
  std::vector<double> buf(static_cast<std::size_t>(window));
  for (int k = 0; k < n; ++k) {
    for (int w = -half; w <= half; ++w) {
      buf[w + half] = scan.ranges[std::clamp(k + w, 0, n - 1)];
    }
    std::nth_element(buf.begin(), buf.begin() + half, buf.end());
    out.ranges[k] = buf[half];
  }
  return out;
}

}  // namespace pointnav
