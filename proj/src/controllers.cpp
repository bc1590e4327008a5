#include "tactsim/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tactsim {
namespace {

constexpr double kArrivalTolMm = 0.01;

double toward(double current, double target, double max_step) {
  return current + std::clamp(target - current, -max_step, max_step);
}

}  // namespace

StiffnessPreset preset(PresetId id) {
  switch (id) {
    case PresetId::P1:
      return {id, ImpedanceParams(1.2, 1.0, 20.0)};
    case PresetId::P2:
      return {id, ImpedanceParams(0.6, 1.0, 3.0)};
    case PresetId::P3:
      return {id, ImpedanceParams(0.6, 1.0, 1.0)};
    case PresetId::P4:
      return {id, ForceControlConfig{4.0}};
    case PresetId::P5:
      return {id, ForceControlConfig{2.5}};
    case PresetId::P6:
      return {id, ForceControlConfig{1.0}};
  }
  throw std::invalid_argument("unknown preset id");
}

StiffnessPreset preset_by_name(std::string_view name) {
  for (PresetId id : {PresetId::P1, PresetId::P2, PresetId::P3, PresetId::P4,
                      PresetId::P5, PresetId::P6})
    if (name == preset_name(id)) return preset(id);
  throw std::invalid_argument("unknown preset '" + std::string(name) +
                              "' (expected P1..P6)");
}

const char* preset_name(PresetId id) {
  switch (id) {
    case PresetId::P1: return "P1";
    case PresetId::P2: return "P2";
    case PresetId::P3: return "P3";
    case PresetId::P4: return "P4";
    case PresetId::P5: return "P5";
    case PresetId::P6: return "P6";
  }
  return "?";
}

ForceStepResult force_control_step(const ForceControlConfig& config,
                                   ForceControlPhase phase,
                                   const std::array<double, kUnitCount>& sensed_n,
                                   const std::array<double, kUnitCount>& current_y_mm,
                                   double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");

  ForceStepResult result;
  const double step_mm = config.approach_speed_mm_s * dt;

  if (phase == ForceControlPhase::Approaching &&
      *std::max_element(sensed_n.begin(), sensed_n.end()) >=
          config.limit_force_n)
    phase = ForceControlPhase::Retracting;

  switch (phase) {
    case ForceControlPhase::Approaching:
      // Advance into the palm; y grows toward the surface and beyond.
      for (int i = 0; i < kUnitCount; ++i)
        result.output.target_y_mm[static_cast<size_t>(i)] =
            current_y_mm[static_cast<size_t>(i)] + step_mm;
      break;
    case ForceControlPhase::Retracting: {
      bool arrived = true;
      for (int i = 0; i < kUnitCount; ++i) {
        const double y = current_y_mm[static_cast<size_t>(i)];
        arrived = arrived && std::abs(y - config.home_y_mm) <= kArrivalTolMm;
        result.output.target_y_mm[static_cast<size_t>(i)] =
            toward(y, config.home_y_mm, step_mm);
      }
      if (arrived) {
        phase = ForceControlPhase::Home;
        result.output.target_y_mm = {config.home_y_mm, config.home_y_mm,
                                     config.home_y_mm};
      }
      break;
    }
    case ForceControlPhase::Home:
      result.output.target_y_mm = {config.home_y_mm, config.home_y_mm,
                                   config.home_y_mm};
      break;
  }
  result.phase = phase;
  return result;
}

ImpedanceStepResult impedance_control_step(
    const std::array<DiscreteModel, kUnitCount>& models,
    const std::array<ImpedanceState, kUnitCount>& states,
    const std::array<double, kUnitCount>& sensed_n,
    const std::array<double, kUnitCount>& nominal_y_mm) {
  ImpedanceStepResult result;
  for (int i = 0; i < kUnitCount; ++i) {
    const auto idx = static_cast<size_t>(i);
    result.states[idx] = step(models[idx], states[idx], sensed_n[idx]);
    result.output.target_y_mm[idx] =
        nominal_y_mm[idx] + result.states[idx].displacement * 1000.0;
  }
  return result;
}

std::vector<DeviceTraceRow> closed_loop(const StiffnessPreset& preset,
                                        DeviceSim& device, double duration_s,
                                        const ClosedLoopConfig& config) {
  if (!(config.tick_s > 0.0)) throw std::invalid_argument("tick must be positive");
  if (duration_s < 0.0) throw std::invalid_argument("duration must be >= 0");

  const int steps = static_cast<int>(std::llround(duration_s / config.tick_s));
  std::vector<DeviceTraceRow> trace;
  trace.reserve(static_cast<size_t>(steps) * kUnitCount);

  // Clamp bands per unit so controller outputs always stay commandable.
  std::array<YRange, kUnitCount> bands;
  for (int i = 0; i < kUnitCount; ++i) {
    const auto idx = static_cast<size_t>(i);
    auto range = reachable_y_range(device.geometry(), config.nominal[idx].x,
                                   device.palm().surface_y_mm[idx]);
    if (!range)
      throw std::runtime_error("closed loop: contact column outside workspace");
    constexpr double kMarginMm = 0.1;
    bands[idx] = YRange{range->lo + kMarginMm, range->hi - kMarginMm};
  }
  auto clamp_band = [&](int i, double y) {
    const auto idx = static_cast<size_t>(i);
    return std::clamp(y, bands[idx].lo, bands[idx].hi);
  };

  std::array<ImpedanceState, kUnitCount> states{};
  std::array<DiscreteModel, kUnitCount> models{};
  ForceControlPhase phase = ForceControlPhase::Approaching;
  std::array<double, kUnitCount> current_y{};
  for (int i = 0; i < kUnitCount; ++i)
    current_y[static_cast<size_t>(i)] = device.unit(i).command.y;

  if (preset.is_impedance()) {
    const auto& params = std::get<ImpedanceParams>(preset.law);
    const DiscreteModel model = discretize(params, config.tick_s);
    models = {model, model, model};
  }

  for (int k = 0; k < steps; ++k) {
    const auto sensed = device.sensed_forces();

    ControllerOutput output;
    if (preset.is_impedance()) {
      std::array<double, kUnitCount> nominal_y{};
      for (int i = 0; i < kUnitCount; ++i)
        nominal_y[static_cast<size_t>(i)] = config.nominal[static_cast<size_t>(i)].y;
      auto step_result = impedance_control_step(models, states, sensed, nominal_y);
      states = step_result.states;
      output = step_result.output;
    } else {
      const auto& fc = std::get<ForceControlConfig>(preset.law);
      auto step_result = force_control_step(fc, phase, sensed, current_y,
                                            config.tick_s);
      phase = step_result.phase;
      output = step_result.output;
    }

    std::array<ContactPoint, kUnitCount> commands;
    for (int i = 0; i < kUnitCount; ++i) {
      const auto idx = static_cast<size_t>(i);
      commands[idx] = ContactPoint{config.nominal[idx].x,
                                   clamp_band(i, output.target_y_mm[idx])};
      current_y[idx] = commands[idx].y;
    }
    if (auto err = device.tick(commands, config.tick_s))
      throw std::runtime_error(std::string("closed loop device error: ") +
                               to_string(*err));
    device.append_trace(trace);
  }
  return trace;
}

}  // namespace tactsim
