#include "pointnav/geometry.hpp"

#include <stdexcept>

namespace pointnav {

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return r;
}

Pose compose(const Pose& a, const Pose& b_rel) {
  const Vec2 t = rotate({b_rel.x, b_rel.y}, a.theta);
  return {a.x + t.x, a.y + t.y, wrap_angle(a.theta + b_rel.theta)};
}

Pose inverse(const Pose& p) {
  const Vec2 t = rotate({-p.x, -p.y}, -p.theta);
  return {t.x, t.y, wrap_angle(-p.theta)};
}

Pose relative(const Pose& frame, const Pose& p) {
  const Vec2 t = rotate(p.position() - frame.position(), -frame.theta);
  return {t.x, t.y, wrap_angle(p.theta - frame.theta)};
}

Pose to_pose(const Egomotion& e) { return {e.ex, e.ey, e.etheta}; }

Egomotion to_egomotion(const Pose& p) { return {p.x, p.y, p.theta}; }

Pose apply_egomotion(const Pose& p, const Egomotion& e) {
  return compose(p, to_pose(e));
}

Egomotion egomotion_between(const Pose& from, const Pose& to) {
  return to_egomotion(relative(from, to));
}

Egomotion inverse(const Egomotion& e) {
  return to_egomotion(inverse(to_pose(e)));
}

GoalVector update_goal(const GoalVector& g_prev, const Egomotion& e_est) {
  const Vec2 shifted{g_prev.gx - e_est.ex, g_prev.gy - e_est.ey};
  const Vec2 r = rotate(shifted, -e_est.etheta);
  return {r.x, r.y};
}

Vec2 goal_world(const Pose& pose, const GoalVector& g) {
  return pose.position() + rotate({g.gx, g.gy}, pose.theta);
}

GoalVector goal_vector(const Pose& pose, Vec2 goal) {
  const Vec2 r = rotate(goal - pose.position(), -pose.theta);
  return {r.x, r.y};
}

bool is_finite(const Pose& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.theta);
}

bool is_finite(const Egomotion& e) {
  return std::isfinite(e.ex) && std::isfinite(e.ey) && std::isfinite(e.etheta);
}

}  // namespace pointnav
