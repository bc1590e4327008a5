#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "tactsim/config.hpp"
#include "tactsim/linkage.hpp"

namespace tactsim {

inline constexpr int kUnitCount = 3;

// Rated angular speed of the servos: 60 degrees per 0.07 s.
inline constexpr double kDefaultServoRateRadS =
    (3.14159265358979323846 / 3.0) / kServoSecondsPer60Deg;

// Palm contact model per unit: a flat surface at surface_y in the unit's
// plane and a linear skin stiffness. Raw contact force is
// compliance * penetration with penetration measured in meters.
struct PalmModel {
  std::array<double, kUnitCount> surface_y_mm{30.0, 30.0, 30.0};
  double compliance_n_per_m = 500.0;
};

// Force-sensitive resistor at one end-effector. Readings are
// raw + bias + noise - calibration_offset, clamped to [0, saturation].
struct FsrSensor {
  double noise_sigma_n = 0.02;
  double calibration_offset_n = 0.0;
  double saturation_n = 10.0;
  double bias_n = 0.0;
};

struct ServoModel {
  double angle_rad = 0.0;
  double rate_limit_rad_s = kDefaultServoRateRadS;
};

enum class DeviceError {
  Unreachable,
  NotInNonTouchPose,
  NoClosure,
};

const char* to_string(DeviceError err);

// One trace record per unit per tick.
struct DeviceTraceRow {
  double time_s;
  int unit;
  double cmd_x_mm;
  double cmd_y_mm;
  double act_x_mm;
  double act_y_mm;
  double palm_y_mm;
  double force_n;
};

void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, std::span<const DeviceTraceRow> rows);

// Fixed-tick simulation of the three-unit device: rate-limited servos
// tracking inverse-kinematics targets, palm contact compliance, and
// noisy force sensing with non-touch calibration. The state is owned by
// a single simulation loop; callers interact through commands and
// snapshots only.
class DeviceSim {
 public:
  struct Unit {
    ServoModel left;
    ServoModel right;
    JointAngles target;        // IK solution of the accepted command
    ContactPoint command;      // last accepted command
    ContactPoint effector;     // forward kinematics of current angles
    double raw_force_n = 0.0;
    double sensed_force_n = 0.0;
    FsrSensor sensor;
  };

  // All units start at `initial` (throws std::invalid_argument when it
  // is outside the workspace).
  DeviceSim(LinkageGeometry geometry, PalmModel palm, FsrSensor sensor,
            std::uint64_t noise_seed,
            ContactPoint initial = ContactPoint{20.0, 28.0});

  // Validates the command against the workspace and stores its servo
  // target. On Unreachable the previous target is retained.
  std::optional<DeviceError> set_target(int unit, const ContactPoint& command);

  // Advances every servo toward its target by at most rate * dt,
  // recomputes end-effectors and forces, advances the clock.
  std::optional<DeviceError> tick(double dt);
  std::optional<DeviceError> tick(const std::array<ContactPoint, kUnitCount>& commands,
                                  double dt);

  // Non-touch calibration: requires zero penetration on all units, then
  // sets each sensor offset to the mean of 100 raw readings.
  std::optional<DeviceError> calibrate();

  void set_servo_rate(double rate_limit_rad_s);

  // Fresh sensor sample per unit (draws new noise, updates the stored
  // sensed forces).
  std::array<double, kUnitCount> read_forces();

  std::array<double, kUnitCount> sensed_forces() const;
  const Unit& unit(int index) const { return units_[static_cast<size_t>(index)]; }
  Unit& unit_mutable(int index) { return units_[static_cast<size_t>(index)]; }
  const LinkageGeometry& geometry() const { return geometry_; }
  const PalmModel& palm() const { return palm_; }
  double clock() const { return clock_s_; }

  void append_trace(std::vector<DeviceTraceRow>& out) const;

 private:
  double penetration_mm(int unit) const;
  void refresh_forces();
  double gaussian();

  LinkageGeometry geometry_;
  PalmModel palm_;
  std::array<Unit, kUnitCount> units_;
  double clock_s_ = 0.0;
  std::uint64_t rng_state_;
};

// Loaders for the flat key/value device file. Geometry keys are
// required (base_separation_mm, proximal_mm, distal_mm, servo_min_deg,
// servo_max_deg); palm/sensor/controller keys are optional and default
// to the values above.
LinkageGeometry load_geometry(const KeyValueFile& file);

struct DeviceConfig {
  PalmModel palm;
  FsrSensor sensor;
  double servo_seconds_per_60deg = kServoSecondsPer60Deg;
  double approach_speed_mm_s = 20.0;
  double home_y_mm = 28.0;
};
DeviceConfig load_device_config(const KeyValueFile& file);

}  // namespace tactsim
