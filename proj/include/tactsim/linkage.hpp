#pragma once

#include <optional>

namespace tactsim {

// Planar coordinate in one linkage unit's frame. x runs along the palm
// plane between the two servo axes, y is normal to the base line with
// positive values toward the palm. Units are millimeters.
struct ContactPoint {
  double x = 0.0;
  double y = 0.0;
};

// Servo angle pair of one unit, in radians, measured counterclockwise
// from the base line. The left servo sits at the frame origin, the right
// servo at (base_separation, 0).
struct JointAngles {
  double left = 0.0;
  double right = 0.0;
};

// One 2-DoF inverted five-bar unit: two servo-driven proximal links and
// two free distal links meeting at a single end-effector that presses
// toward the palm. Both servos share identical angle limits.
class LinkageGeometry {
 public:
  // Throws std::invalid_argument on non-positive lengths, an empty angle
  // range, or a geometry whose workspace is empty (checked by sampling).
  LinkageGeometry(double base_separation_mm, double proximal_mm,
                  double distal_mm, double servo_min_rad,
                  double servo_max_rad);

  double base_separation() const { return base_separation_; }
  double proximal() const { return proximal_; }
  double distal() const { return distal_; }
  double servo_min() const { return servo_min_; }
  double servo_max() const { return servo_max_; }
  double midline_x() const { return 0.5 * base_separation_; }

  bool within_limits(const JointAngles& angles) const;

 private:
  double base_separation_;
  double proximal_;
  double distal_;
  double servo_min_;
  double servo_max_;
};

// End-effector position for a servo angle pair: the intersection of the
// two distal-link circles around the proximal-link tips. Of the two
// intersections the elbow-up one (larger y, farther from the base) is
// returned. Empty when the mechanism cannot close at these angles.
std::optional<ContactPoint> forward_kinematics(const LinkageGeometry& geom,
                                               const JointAngles& angles);

// Servo angles that place the end-effector at `target` on the elbow-up
// branch, within servo limits. Empty when no such solution exists.
std::optional<JointAngles> inverse_kinematics(const LinkageGeometry& geom,
                                              const ContactPoint& target);

bool workspace_contains(const LinkageGeometry& geom,
                        const ContactPoint& target);

// Rated servo speed: 60 degrees in 0.07 s.
inline constexpr double kServoSecondsPer60Deg = 0.07;

// Time for both servos, moving simultaneously at rated speed, to finish
// the larger of the two angle changes.
double travel_time(const JointAngles& from, const JointAngles& to,
                   double seconds_per_60deg = kServoSecondsPer60Deg);

// Contiguous reachable y interval at fixed x containing y_probe, edges
// located by bisection. Empty when y_probe's column is entirely outside
// the workspace.
struct YRange {
  double lo = 0.0;
  double hi = 0.0;
};
std::optional<YRange> reachable_y_range(const LinkageGeometry& geom, double x,
                                        double y_probe);

}  // namespace tactsim
