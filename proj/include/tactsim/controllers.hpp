#pragma once

#include <array>
#include <string_view>
#include <variant>
#include <vector>

#include "tactsim/device.hpp"
#include "tactsim/impedance.hpp"

namespace tactsim {

// Limit-force strategy: approach the palm until any sensor reaches
// limit_force, then retract to the no-contact home position.
struct ForceControlConfig {
  double limit_force_n;
  double approach_speed_mm_s = 20.0;
  double home_y_mm = 28.0;
};

enum class PresetId { P1, P2, P3, P4, P5, P6 };

// The six stiffness presets: P1-P3 impedance laws, P4-P6 force limits.
struct StiffnessPreset {
  PresetId id;
  std::variant<ImpedanceParams, ForceControlConfig> law;

  bool is_impedance() const {
    return std::holds_alternative<ImpedanceParams>(law);
  }
};

StiffnessPreset preset(PresetId id);
StiffnessPreset preset_by_name(std::string_view name);  // "P1".."P6"
const char* preset_name(PresetId id);

// Commanded y position per unit, in millimeters.
struct ControllerOutput {
  std::array<double, kUnitCount> target_y_mm{};
};

enum class ForceControlPhase { Approaching, Retracting, Home };

struct ForceStepResult {
  ControllerOutput output;
  ForceControlPhase phase;
};

// One force-control update. While approaching, all targets advance
// toward the palm by approach_speed * dt; the phase flips to Retracting
// as soon as any sensed force reaches the limit. Retraction moves back
// to home_y; arrival within 0.01 mm on every unit ends in Home.
ForceStepResult force_control_step(const ForceControlConfig& config,
                                   ForceControlPhase phase,
                                   const std::array<double, kUnitCount>& sensed_n,
                                   const std::array<double, kUnitCount>& current_y_mm,
                                   double dt);

struct ImpedanceStepResult {
  ControllerOutput output;
  std::array<ImpedanceState, kUnitCount> states;
};

// One impedance update: each contact point's state advances with its own
// sensed force, independently of the others, and the commanded position
// is nominal_y + dy (dy converted from meters to millimeters).
ImpedanceStepResult impedance_control_step(
    const std::array<DiscreteModel, kUnitCount>& models,
    const std::array<ImpedanceState, kUnitCount>& states,
    const std::array<double, kUnitCount>& sensed_n,
    const std::array<double, kUnitCount>& nominal_y_mm);

struct ClosedLoopConfig {
  // Contact placements: nominal points for impedance mode, approach
  // columns for force mode.
  std::array<ContactPoint, kUnitCount> nominal;
  double tick_s = 0.01;
};

// Runs the controller <-> device loop for `duration_s` and returns the
// per-tick trace. Controller targets are clamped to the workspace before
// being sent. Device errors surface as std::runtime_error.
std::vector<DeviceTraceRow> closed_loop(const StiffnessPreset& preset,
                                        DeviceSim& device, double duration_s,
                                        const ClosedLoopConfig& config);

}  // namespace tactsim
