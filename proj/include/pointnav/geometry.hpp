#pragma once

/// \file
/// \brief Planar pose algebra used throughout the toolkit.
///
/// Conventions: world +x east, +y north, headings CCW from +x. Agent-local
/// frames are +x forward, +y left. Every angle produced here lies in (-pi, pi].

#include <cmath>
#include <numbers>

namespace pointnav {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;

  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Rotates v by angle (CCW).
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// World pose of the agent.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Rigid motion between two consecutive agent frames, expressed in the earlier
/// frame: ex forward, ey left, etheta CCW.
///
/// The MAE convention of the Habitat-style (x, y, z) tuple maps onto this as
/// x = ey (left), y = 0 (vertical, identically zero on the plane), z = ex.
struct Egomotion {
  double ex = 0.0;
  double ey = 0.0;
  double etheta = 0.0;

  friend bool operator==(const Egomotion&, const Egomotion&) = default;
};

/// Goal coordinates relative to the agent: gx forward, gy left.
struct GoalVector {
  double gx = 0.0;
  double gy = 0.0;

  double norm() const { return std::hypot(gx, gy); }
  friend bool operator==(const GoalVector&, const GoalVector&) = default;
};

/// Maps theta into (-pi, pi]. Throws std::invalid_argument on non-finite input.
double wrap_angle(double theta);

/// World pose of the frame `b_rel` expressed in `a`'s local frame.
Pose compose(const Pose& a, const Pose& b_rel);

Pose inverse(const Pose& p);

/// Pose of `p` expressed in the local frame of `frame`.
Pose relative(const Pose& frame, const Pose& p);

Pose apply_egomotion(const Pose& p, const Egomotion& e);

/// Egomotion taking frame `from` to frame `to`.
Egomotion egomotion_between(const Pose& from, const Pose& to);

Pose to_pose(const Egomotion& e);
Egomotion to_egomotion(const Pose& p);

/// SE(2) inverse of an egomotion (the motion that undoes it).
Egomotion inverse(const Egomotion& e);

/// Goal vector in the new frame after the agent moved by `e_est`:
/// R(-etheta) * (g_prev - (ex, ey)).
GoalVector update_goal(const GoalVector& g_prev, const Egomotion& e_est);

/// World point addressed by a goal vector from a given pose.
Vec2 goal_world(const Pose& pose, const GoalVector& g);

/// Goal vector for a world goal point seen from `pose`.
GoalVector goal_vector(const Pose& pose, Vec2 goal);

bool is_finite(const Pose& p);
bool is_finite(const Egomotion& e);

}  // namespace pointnav
