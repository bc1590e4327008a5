#include "tactsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tactsim/csv.hpp"

namespace tactsim {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

// splitmix64: small, seedable, identical everywhere.
std::uint64_t next_u64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return (static_cast<double>(next_u64(state) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

const char* to_string(DeviceError err) {
  switch (err) {
    case DeviceError::Unreachable:
      return "target unreachable";
    case DeviceError::NotInNonTouchPose:
      return "not in non-touch pose";
    case DeviceError::NoClosure:
      return "mechanism cannot close";
  }
  return "unknown device error";
}

void write_trace_header(std::ostream& out) {
  out << "time_s,unit,cmd_x_mm,cmd_y_mm,act_x_mm,act_y_mm,palm_y_mm,force_n\n";
}

void write_trace_rows(std::ostream& out, std::span<const DeviceTraceRow> rows) {
  for (const auto& r : rows) {
    out << format_number(r.time_s) << ',' << r.unit << ','
        << format_number(r.cmd_x_mm) << ',' << format_number(r.cmd_y_mm) << ','
        << format_number(r.act_x_mm) << ',' << format_number(r.act_y_mm) << ','
        << format_number(r.palm_y_mm) << ',' << format_number(r.force_n)
        << '\n';
  }
}

DeviceSim::DeviceSim(LinkageGeometry geometry, PalmModel palm, FsrSensor sensor,
                     std::uint64_t noise_seed, ContactPoint initial)
    : geometry_(std::move(geometry)), palm_(palm), rng_state_(noise_seed) {
  auto angles = inverse_kinematics(geometry_, initial);
  if (!angles)
    throw std::invalid_argument("initial device pose is unreachable");
  for (auto& unit : units_) {
    unit.left.angle_rad = angles->left;
    unit.right.angle_rad = angles->right;
    unit.target = *angles;
    unit.command = initial;
    unit.effector = initial;
    unit.sensor = sensor;
  }
  refresh_forces();
}

std::optional<DeviceError> DeviceSim::set_target(int unit_index,
                                                 const ContactPoint& command) {
  auto angles = inverse_kinematics(geometry_, command);
  if (!angles) return DeviceError::Unreachable;
  auto& unit = units_[static_cast<size_t>(unit_index)];
  unit.target = *angles;
  unit.command = command;
  return std::nullopt;
}

std::optional<DeviceError> DeviceSim::tick(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("tick dt must be positive");

  for (auto& unit : units_) {
    auto advance = [dt](ServoModel& servo, double target) {
      const double max_step = servo.rate_limit_rad_s * dt;
      const double delta =
          std::clamp(target - servo.angle_rad, -max_step, max_step);
      servo.angle_rad += delta;
    };
    const JointAngles before{unit.left.angle_rad, unit.right.angle_rad};
    advance(unit.left, unit.target.left);
    advance(unit.right, unit.target.right);

    auto effector = forward_kinematics(
        geometry_, JointAngles{unit.left.angle_rad, unit.right.angle_rad});
    if (!effector) {
      // Do not move into a non-closing configuration.
      unit.left.angle_rad = before.left;
      unit.right.angle_rad = before.right;
      return DeviceError::NoClosure;
    }
    unit.effector = *effector;
  }
  refresh_forces();
  clock_s_ += dt;
  return std::nullopt;
}

std::optional<DeviceError> DeviceSim::tick(
    const std::array<ContactPoint, kUnitCount>& commands, double dt) {
  // Validate the whole command set before touching any target.
  std::array<JointAngles, kUnitCount> targets;
  for (int i = 0; i < kUnitCount; ++i) {
    auto angles = inverse_kinematics(geometry_, commands[static_cast<size_t>(i)]);
    if (!angles) return DeviceError::Unreachable;
    targets[static_cast<size_t>(i)] = *angles;
  }
  for (int i = 0; i < kUnitCount; ++i) {
    units_[static_cast<size_t>(i)].target = targets[static_cast<size_t>(i)];
    units_[static_cast<size_t>(i)].command = commands[static_cast<size_t>(i)];
  }
  return tick(dt);
}

void DeviceSim::set_servo_rate(double rate_limit_rad_s) {
  for (auto& unit : units_) {
    unit.left.rate_limit_rad_s = rate_limit_rad_s;
    unit.right.rate_limit_rad_s = rate_limit_rad_s;
  }
}

std::optional<DeviceError> DeviceSim::calibrate() {
  for (int i = 0; i < kUnitCount; ++i)
    if (penetration_mm(i) > 0.0) return DeviceError::NotInNonTouchPose;

  constexpr int kSamples = 100;
  for (auto& unit : units_) {
    double sum = 0.0;
    for (int s = 0; s < kSamples; ++s)
      sum += unit.raw_force_n + unit.sensor.bias_n +
             unit.sensor.noise_sigma_n * gaussian();
    unit.sensor.calibration_offset_n = sum / kSamples;
  }
  refresh_forces();
  return std::nullopt;
}

std::array<double, kUnitCount> DeviceSim::read_forces() {
  refresh_forces();
  return sensed_forces();
}

std::array<double, kUnitCount> DeviceSim::sensed_forces() const {
  std::array<double, kUnitCount> forces{};
  for (int i = 0; i < kUnitCount; ++i)
    forces[static_cast<size_t>(i)] =
        units_[static_cast<size_t>(i)].sensed_force_n;
  return forces;
}

void DeviceSim::append_trace(std::vector<DeviceTraceRow>& out) const {
  for (int i = 0; i < kUnitCount; ++i) {
    const auto& unit = units_[static_cast<size_t>(i)];
    out.push_back(DeviceTraceRow{clock_s_, i, unit.command.x, unit.command.y,
                                 unit.effector.x, unit.effector.y,
                                 palm_.surface_y_mm[static_cast<size_t>(i)],
                                 unit.sensed_force_n});
  }
}

double DeviceSim::penetration_mm(int unit_index) const {
  const auto& unit = units_[static_cast<size_t>(unit_index)];
  return std::max(0.0, unit.effector.y -
                           palm_.surface_y_mm[static_cast<size_t>(unit_index)]);
}

void DeviceSim::refresh_forces() {
  for (int i = 0; i < kUnitCount; ++i) {
    auto& unit = units_[static_cast<size_t>(i)];
    unit.raw_force_n =
        palm_.compliance_n_per_m * (penetration_mm(i) / 1000.0);
    const double noisy = unit.raw_force_n + unit.sensor.bias_n +
                         unit.sensor.noise_sigma_n * gaussian() -
                         unit.sensor.calibration_offset_n;
    unit.sensed_force_n = std::clamp(noisy, 0.0, unit.sensor.saturation_n);
  }
}

double DeviceSim::gaussian() {
  // Box-Muller; one draw per call keeps the stream independent of call
  // grouping.
  const double u1 = uniform01(rng_state_);
  const double u2 = uniform01(rng_state_);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

LinkageGeometry load_geometry(const KeyValueFile& file) {
  return LinkageGeometry(file.number("base_separation_mm"),
                         file.number("proximal_mm"), file.number("distal_mm"),
                         file.number("servo_min_deg") * kDegToRad,
                         file.number("servo_max_deg") * kDegToRad);
}

DeviceConfig load_device_config(const KeyValueFile& file) {
  DeviceConfig config;
  const double surface = file.number_or("palm_surface_y_mm", 30.0);
  config.palm.surface_y_mm = {surface, surface, surface};
  config.palm.compliance_n_per_m =
      file.number_or("palm_compliance_n_per_m", 500.0);
  config.sensor.noise_sigma_n = file.number_or("fsr_noise_sigma_n", 0.02);
  config.sensor.saturation_n = file.number_or("fsr_saturation_n", 10.0);
  config.servo_seconds_per_60deg =
      file.number_or("servo_seconds_per_60deg", kServoSecondsPer60Deg);
  config.approach_speed_mm_s = file.number_or("approach_speed_mm_s", 20.0);
  config.home_y_mm = file.number_or("home_y_mm", 28.0);
  if (config.sensor.noise_sigma_n < 0.0 || config.sensor.saturation_n <= 0.0 ||
      config.palm.compliance_n_per_m <= 0.0)
    throw ConfigError(file.source_name() + ": invalid palm/sensor values");
  return config;
}

}  // namespace tactsim
