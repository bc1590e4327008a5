#include "tactsim/linkage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tactsim {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x, y;
};

Vec2 proximal_tip(const LinkageGeometry& geom, double servo_x, double angle) {
  return {servo_x + geom.proximal() * std::cos(angle),
          geom.proximal() * std::sin(angle)};
}

// How closely FK must reproduce a target for an IK candidate to count as
// the elbow-up branch. The rejected branch is the mirror across the
// tip-tip line, macroscopically far away.
constexpr double kBranchMatchTolMm = 1e-6;

}  // namespace

LinkageGeometry::LinkageGeometry(double base_separation_mm, double proximal_mm,
                                 double distal_mm, double servo_min_rad,
                                 double servo_max_rad)
    : base_separation_(base_separation_mm),
      proximal_(proximal_mm),
      distal_(distal_mm),
      servo_min_(servo_min_rad),
      servo_max_(servo_max_rad) {
  if (!(base_separation_ > 0) || !(proximal_ > 0) || !(distal_ > 0))
    throw std::invalid_argument("linkage lengths must be positive");
  if (!(servo_min_ < servo_max_))
    throw std::invalid_argument("servo_min must be below servo_max");

  // The workspace must be non-empty: sample the angle box for at least
  // one closing configuration.
  constexpr int kGrid = 25;
  bool closes = false;
  for (int i = 0; i < kGrid && !closes; ++i) {
    for (int j = 0; j < kGrid && !closes; ++j) {
      JointAngles a{servo_min_ + (servo_max_ - servo_min_) * i / (kGrid - 1),
                    servo_min_ + (servo_max_ - servo_min_) * j / (kGrid - 1)};
      closes = forward_kinematics(*this, a).has_value();
    }
  }
  if (!closes)
    throw std::invalid_argument("linkage geometry has an empty workspace");
}

bool LinkageGeometry::within_limits(const JointAngles& angles) const {
  return angles.left >= servo_min_ && angles.left <= servo_max_ &&
         angles.right >= servo_min_ && angles.right <= servo_max_;
}

std::optional<ContactPoint> forward_kinematics(const LinkageGeometry& geom,
                                               const JointAngles& angles) {
  const Vec2 left = proximal_tip(geom, 0.0, angles.left);
  const Vec2 right =
      proximal_tip(geom, geom.base_separation(), angles.right);

  const double dx = right.x - left.x;
  const double dy = right.y - left.y;
  const double dist = std::hypot(dx, dy);
  const double d = geom.distal();
  if (dist > 2.0 * d || dist <= 0.0) return std::nullopt;

  // Intersection of the two distal circles; h is the half-chord.
  const double h2 = d * d - 0.25 * dist * dist;
  if (h2 < 0.0) return std::nullopt;
  const double h = std::sqrt(h2);
  const double mx = 0.5 * (left.x + right.x);
  const double my = 0.5 * (left.y + right.y);
  const double nx = -dy / dist;
  const double ny = dx / dist;

  ContactPoint up{mx + h * nx, my + h * ny};
  ContactPoint down{mx - h * nx, my - h * ny};
  if (up.y > down.y || (up.y == down.y && up.x >= down.x)) return up;
  return down;
}

std::optional<JointAngles> inverse_kinematics(const LinkageGeometry& geom,
                                              const ContactPoint& target) {
  if (!std::isfinite(target.x) || !std::isfinite(target.y))
    return std::nullopt;

  const double p = geom.proximal();
  const double d = geom.distal();

  // Per side, the proximal tip lies on circle(servo, p) and
  // circle(target, d): servo angle = phi +/- alpha.
  struct Side {
    double phi, alpha;
  };
  auto solve_side = [&](double servo_x) -> std::optional<Side> {
    const double rx = target.x - servo_x;
    const double ry = target.y;
    const double r = std::hypot(rx, ry);
    if (r > p + d || r < std::abs(p - d) || r == 0.0) return std::nullopt;
    const double cos_alpha =
        std::clamp((p * p + r * r - d * d) / (2.0 * p * r), -1.0, 1.0);
    return Side{std::atan2(ry, rx), std::acos(cos_alpha)};
  };

  auto left = solve_side(0.0);
  auto right = solve_side(geom.base_separation());
  if (!left || !right) return std::nullopt;

  // Candidate combinations, elbow-out pair first: that is the M-shape
  // configuration whose forward solution is the elbow-up branch.
  const double l_candidates[2] = {left->phi + left->alpha,
                                  left->phi - left->alpha};
  const double r_candidates[2] = {right->phi - right->alpha,
                                  right->phi + right->alpha};
  for (double l : l_candidates) {
    for (double r : r_candidates) {
      JointAngles angles{l, r};
      if (!geom.within_limits(angles)) continue;
      auto fk = forward_kinematics(geom, angles);
      if (!fk) continue;
      if (std::abs(fk->x - target.x) <= kBranchMatchTolMm &&
          std::abs(fk->y - target.y) <= kBranchMatchTolMm)
        return angles;
    }
  }
  return std::nullopt;
}

bool workspace_contains(const LinkageGeometry& geom,
                        const ContactPoint& target) {
  return inverse_kinematics(geom, target).has_value();
}

double travel_time(const JointAngles& from, const JointAngles& to,
                   double seconds_per_60deg) {
  const double delta = std::max(std::abs(to.left - from.left),
                                std::abs(to.right - from.right));
  return delta * (180.0 / kPi) * (seconds_per_60deg / 60.0);
}

std::optional<YRange> reachable_y_range(const LinkageGeometry& geom, double x,
                                        double y_probe) {
  auto reachable = [&](double y) {
    return workspace_contains(geom, ContactPoint{x, y});
  };

  // Find a reachable seed near the probe, then bisect both edges of its
  // contiguous interval.
  const double reach = geom.proximal() + geom.distal();
  double seed = y_probe;
  if (!reachable(seed)) {
    bool found = false;
    for (double step = 0.5; step <= reach; step += 0.5) {
      if (reachable(y_probe + step)) {
        seed = y_probe + step;
        found = true;
        break;
      }
      if (reachable(y_probe - step)) {
        seed = y_probe - step;
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }

  auto bisect_edge = [&](double inside, double outside) {
    for (int i = 0; i < 60; ++i) {
      double mid = 0.5 * (inside + outside);
      (reachable(mid) ? inside : outside) = mid;
    }
    return inside;
  };

  double lo_out = seed;
  while (reachable(lo_out - 0.5) && seed - lo_out < 2.0 * reach) lo_out -= 0.5;
  double hi_out = seed;
  while (reachable(hi_out + 0.5) && hi_out - seed < 2.0 * reach) hi_out += 0.5;
  return YRange{bisect_edge(lo_out, lo_out - 0.5),
                bisect_edge(hi_out, hi_out + 0.5)};
}

}  // namespace tactsim
