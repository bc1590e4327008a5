#include "tactsim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tactsim/config.hpp"
#include "tactsim/controllers.hpp"
#include "tactsim/csv.hpp"
#include "tactsim/device.hpp"
#include "tactsim/impedance.hpp"
#include "tactsim/patterns.hpp"
#include "tactsim/protocol.hpp"
#include "tactsim/server.hpp"

namespace tactsim {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::atomic<bool> g_interrupted{false};
void on_sigint(int) { g_interrupted.store(true); }

struct CommonOptions {
  std::string geometry_path = "configs/geometry.cfg";
  std::string patterns_path = "configs/patterns.cfg";
  std::string preset;
  double duration_s = 2.0;
  double tick_s = 0.01;
  std::uint64_t seed = 1;
  std::string out_path;
};

struct LoadedDevice {
  LinkageGeometry geometry;
  DeviceConfig config;
};

LoadedDevice load_device_files(const std::string& geometry_path) {
  const KeyValueFile file = KeyValueFile::parse_file(geometry_path);
  return LoadedDevice{load_geometry(file), load_device_config(file)};
}

DeviceSim make_device(const LoadedDevice& loaded, std::uint64_t seed) {
  const ContactPoint home{loaded.geometry.midline_x(), loaded.config.home_y_mm};
  DeviceSim device(loaded.geometry, loaded.config.palm, loaded.config.sensor,
                   seed, home);
  device.set_servo_rate((3.14159265358979323846 / 3.0) /
                        loaded.config.servo_seconds_per_60deg);
  return device;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

std::vector<double> read_force_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open force profile: " + path);
  std::vector<double> profile;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    double value = 0.0;
    auto* first = line.data() + begin;
    auto* last = line.data() + end + 1;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": bad force value");
    profile.push_back(value);
  }
  if (profile.empty()) throw ConfigError(path + ": empty force profile");
  return profile;
}

int cmd_impedance(const CommonOptions& common, double mass, double damping,
                  double stiffness, bool explicit_params, double force_n,
                  const std::string& profile_path) {
  std::optional<ImpedanceParams> params;
  if (explicit_params) {
    params.emplace(mass, damping, stiffness);
  } else {
    const StiffnessPreset chosen =
        preset_by_name(common.preset.empty() ? "P1" : common.preset);
    if (!chosen.is_impedance())
      throw ConfigError("preset " + common.preset +
                        " is a force-control preset; use P1..P3 or explicit "
                        "--mass/--damping/--stiffness");
    params.emplace(std::get<ImpedanceParams>(chosen.law));
  }

  const LoadedDevice loaded = load_device_files(common.geometry_path);
  DeviceSim device = make_device(loaded, common.seed);

  std::vector<double> profile;
  if (!profile_path.empty()) {
    profile = read_force_profile(profile_path);
  } else {
    const int steps =
        static_cast<int>(std::llround(common.duration_s / common.tick_s));
    profile.assign(static_cast<size_t>(std::max(steps, 0)), force_n);
  }

  const double mid_x = loaded.geometry.midline_x();
  const double nominal_y = loaded.config.palm.surface_y_mm[1];
  auto band = reachable_y_range(loaded.geometry, mid_x, nominal_y);
  if (!band) throw std::runtime_error("palm line outside workspace");
  const double lo = band->lo + 0.1, hi = band->hi - 0.1;

  const DiscreteModel model = discretize(*params, common.tick_s);
  ImpedanceState state;

  std::ostringstream csv;
  csv << "time_s,commanded_y_mm,actual_y_mm,palm_y_mm,force_n\n";
  auto emit = [&](double t, double commanded, double force) {
    csv << format_number(t) << ',' << format_number(commanded) << ','
        << format_number(device.unit(1).effector.y) << ','
        << format_number(nominal_y) << ',' << format_number(force) << '\n';
  };
  if (!profile.empty()) emit(0.0, nominal_y, 0.0);

  for (size_t k = 0; k < profile.size(); ++k) {
    state = step(model, state, profile[k]);
    // commanded is the impedance model's own output; the device receives
    // it clamped to the reachable band.
    const double commanded = nominal_y + state.displacement * 1000.0;
    if (auto err = device.set_target(
            1, ContactPoint{mid_x, std::clamp(commanded, lo, hi)}))
      throw std::runtime_error(to_string(*err));
    if (auto err = device.tick(common.tick_s))
      throw std::runtime_error(to_string(*err));
    emit(static_cast<double>(k + 1) * common.tick_s, commanded, profile[k]);
  }

  if (common.out_path.empty()) {
    std::cout << csv.str();
  } else {
    open_output(common.out_path) << csv.str();
  }
  return kExitOk;
}

std::vector<int> read_responses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open responses file: " + path);
  std::vector<int> responses;
  std::string token;
  while (in >> token) {
    int id = 0;
    auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), id);
    if (ec != std::errc{} || ptr != token.data() + token.size())
      throw std::runtime_error(path + ": bad response '" + token + "'");
    responses.push_back(id);
  }
  return responses;
}

int cmd_experiment(const CommonOptions& common, int repetitions,
                   const std::string& responses_path,
                   const std::string& report_path) {
  const LoadedDevice loaded = load_device_files(common.geometry_path);
  const PatternLibrary library = load_pattern_library(
      KeyValueFile::parse_file(common.patterns_path), loaded.geometry);
  if (library.empty()) throw ConfigError("pattern library is empty");

  std::vector<int> ids;
  for (const auto& pattern : library) ids.push_back(pattern.id);
  const TrialSchedule schedule = build_schedule(ids, repetitions, common.seed);

  DeviceSim device = make_device(loaded, common.seed);
  const ContactPoint home{loaded.geometry.midline_x(),
                          loaded.config.home_y_mm};
  if (auto err = device.calibrate())
    throw std::runtime_error(to_string(*err));

  const bool interactive = responses_path.empty();
  std::vector<int> responses;
  if (!interactive) {
    responses = read_responses(responses_path);
    if (responses.size() != schedule.trials.size())
      throw std::runtime_error(
          "response count (" + std::to_string(responses.size()) +
          ") does not match trial count (" +
          std::to_string(schedule.trials.size()) + ")");
  }

  auto find_pattern = [&](int id) -> const TactilePattern& {
    for (const auto& pattern : library)
      if (pattern.id == id) return pattern;
    throw std::runtime_error("pattern id missing from library");
  };

  std::vector<std::pair<int, int>> log;
  for (size_t trial = 0; trial < schedule.trials.size(); ++trial) {
    const int actual = schedule.trials[trial];
    render_pattern(find_pattern(actual), device, common.tick_s, home);
    home_all(device, home, 0.5, common.tick_s);

    int predicted = 0;
    if (interactive) {
      std::cout << "trial " << (trial + 1) << "/" << schedule.trials.size()
                << ": pattern delivered; perceived id? " << std::flush;
      std::string line;
      if (!std::getline(std::cin, line))
        throw std::runtime_error("responses ended before the last trial");
      auto [ptr, ec] =
          std::from_chars(line.data(), line.data() + line.size(), predicted);
      if (ec != std::errc{} || ptr != line.data() + line.size())
        throw std::runtime_error("bad response '" + line + "'");
    } else {
      predicted = responses[trial];
    }
    log.emplace_back(actual, predicted);
  }

  std::ostringstream log_csv;
  log_csv << "trial,actual_id,predicted_id\n";
  for (size_t i = 0; i < log.size(); ++i)
    log_csv << (i + 1) << ',' << log[i].first << ',' << log[i].second << '\n';
  if (common.out_path.empty()) {
    std::cout << log_csv.str();
  } else {
    open_output(common.out_path) << log_csv.str();
  }

  const ConfusionMatrix matrix = ConfusionMatrix::from_log(log, ids);
  if (report_path.empty()) {
    matrix.write_report(std::cout);
  } else {
    auto out = open_output(report_path);
    matrix.write_report(out);
  }
  return kExitOk;
}

int cmd_serve(const CommonOptions& common, const std::string& host,
              std::uint16_t port) {
  const LoadedDevice loaded = load_device_files(common.geometry_path);
  DeviceSim device = make_device(loaded, common.seed);

  std::vector<DeviceTraceRow> trace;
  ServeOptions options;
  options.host = host;
  options.port = port;
  options.tick_s = common.tick_s;
  options.trace_sink = common.out_path.empty() ? nullptr : &trace;

  TcpServer server(device, options);
  std::cerr << "listening on " << host << ":" << server.port() << "\n";
  std::signal(SIGINT, on_sigint);
  std::signal(SIGTERM, on_sigint);
  server.run(g_interrupted);

  if (!common.out_path.empty()) {
    auto out = open_output(common.out_path);
    write_trace_header(out);
    write_trace_rows(out, trace);
  }
  return kExitOk;
}

int cmd_analyze(const std::string& log_path, const std::string& report_path) {
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("cannot open trial log: " + log_path);

  std::vector<std::pair<int, int>> log;
  std::set<int> label_set;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("trial,")) continue;
    if (line.empty()) continue;
    int trial = 0, actual = 0, predicted = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d", &trial, &actual, &predicted) != 3)
      throw std::runtime_error(log_path + ":" + std::to_string(line_no) +
                               ": expected 'trial,actual_id,predicted_id'");
    log.emplace_back(actual, predicted);
    label_set.insert(actual);
    label_set.insert(predicted);
  }
  if (log.empty()) throw std::runtime_error(log_path + ": no trials");

  const ConfusionMatrix matrix = ConfusionMatrix::from_log(
      log, std::vector<int>(label_set.begin(), label_set.end()));
  if (report_path.empty()) {
    matrix.write_report(std::cout);
  } else {
    auto out = open_output(report_path);
    matrix.write_report(out);
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Three-contact palm tactile display simulator"};
  app.require_subcommand(1);

  CommonOptions common;
  app.add_option("--geometry", common.geometry_path,
                 "Device geometry/config file");
  app.add_option("--patterns", common.patterns_path, "Pattern library file");
  app.add_option("--preset", common.preset, "Stiffness preset P1..P6");
  app.add_option("--duration", common.duration_s, "Simulated seconds");
  app.add_option("--tick", common.tick_s, "Loop period in seconds");
  app.add_option("--seed", common.seed, "Random seed");
  app.add_option("--out", common.out_path, "Output CSV path (default stdout)");

  auto* impedance_cmd = app.add_subcommand(
      "impedance", "Trace the impedance response of one contact point");
  impedance_cmd->fallthrough();
  double mass = 1.0, damping = 0.0, stiffness = 0.0, force_n = 1.0;
  std::string profile_path;
  auto* mass_opt = impedance_cmd->add_option("--mass", mass, "Virtual mass, kg");
  auto* damping_opt =
      impedance_cmd->add_option("--damping", damping, "Damping, N*s/m");
  auto* stiffness_opt =
      impedance_cmd->add_option("--stiffness", stiffness, "Stiffness, N/m");
  impedance_cmd->add_option("--force", force_n,
                            "Constant external force, N (default 1)");
  impedance_cmd->add_option("--force-profile", profile_path,
                            "File with one force value per tick");

  auto* experiment_cmd = app.add_subcommand(
      "experiment", "Run the randomized pattern recognition protocol");
  experiment_cmd->fallthrough();
  int repetitions = 5;
  std::string responses_path, report_path;
  experiment_cmd->add_option("--repetitions", repetitions,
                             "Deliveries per pattern (default 5)");
  experiment_cmd->add_option("--responses", responses_path,
                             "Predicted ids, one per trial (default: ask on stdin)");
  experiment_cmd->add_option("--report", report_path,
                             "Confusion matrix report path (default stdout)");

  auto* serve_cmd =
      app.add_subcommand("serve", "Serve the wire protocol on TCP");
  serve_cmd->fallthrough();
  std::string host = "127.0.0.1";
  std::uint16_t port = 4555;
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--port", port, "Listen port (0 = ephemeral)");

  auto* analyze_cmd =
      app.add_subcommand("analyze", "Confusion matrix from a trial log");
  analyze_cmd->fallthrough();
  std::string log_path;
  analyze_cmd->add_option("--log", log_path, "Trial log CSV")->required();
  analyze_cmd->add_option("--report", report_path,
                          "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (impedance_cmd->parsed()) {
      const bool explicit_params =
          mass_opt->count() || damping_opt->count() || stiffness_opt->count();
      if (explicit_params &&
          !(mass_opt->count() && damping_opt->count() && stiffness_opt->count()))
        throw ConfigError(
            "--mass, --damping and --stiffness must be given together");
      if (explicit_params && !common.preset.empty())
        throw ConfigError("give either --preset or explicit parameters");
      return cmd_impedance(common, mass, damping, stiffness, explicit_params,
                           force_n, profile_path);
    }
    if (experiment_cmd->parsed())
      return cmd_experiment(common, repetitions, responses_path, report_path);
    if (serve_cmd->parsed()) return cmd_serve(common, host, port);
    if (analyze_cmd->parsed()) return cmd_analyze(log_path, report_path);
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace tactsim
