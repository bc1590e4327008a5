#include "tactsim/patterns.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "tactsim/csv.hpp"

namespace tactsim {
namespace {

std::uint64_t next_u64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double parse_double(std::string_view token, const std::string& context) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() ||
      !std::isfinite(value))
    throw ConfigError(context + ": bad number '" + std::string(token) + "'");
  return value;
}

}  // namespace

PatternLibrary load_pattern_library(const KeyValueFile& file,
                                    const LinkageGeometry& geometry) {
  const double duration = file.number_or("duration_s", 2.0);
  if (!(duration > 0.0))
    throw ConfigError(file.source_name() + ": duration_s must be positive");

  PatternLibrary library;
  for (const auto& [key, value] : file.entries()) {
    if (!key.starts_with("pattern.")) continue;
    const std::string context = file.source_name() + ": " + key;

    int id = 0;
    {
      std::string_view id_token = std::string_view(key).substr(8);
      auto [ptr, ec] = std::from_chars(id_token.data(),
                                       id_token.data() + id_token.size(), id);
      if (ec != std::errc{} || ptr != id_token.data() + id_token.size())
        throw ConfigError(context + ": bad pattern id");
    }
    for (const auto& existing : library)
      if (existing.id == id)
        throw ConfigError(context + ": duplicate pattern id");

    TactilePattern pattern;
    pattern.id = id;
    pattern.duration_s = duration;

    // Three whitespace-separated tokens: "x:y" or "-".
    std::vector<std::string_view> tokens;
    std::string_view rest = value;
    while (!rest.empty()) {
      auto space = rest.find_first_of(" \t");
      tokens.push_back(rest.substr(0, space));
      if (space == std::string_view::npos) break;
      auto next = rest.find_first_not_of(" \t", space);
      if (next == std::string_view::npos) break;
      rest = rest.substr(next);
    }
    if (tokens.size() != kUnitCount)
      throw ConfigError(context + ": expected 3 placements");

    bool any_active = false;
    for (int i = 0; i < kUnitCount; ++i) {
      std::string_view token = tokens[static_cast<size_t>(i)];
      if (token == "-") continue;
      auto colon = token.find(':');
      if (colon == std::string_view::npos)
        throw ConfigError(context + ": placement must be 'x:y' or '-'");
      ContactPoint point{parse_double(token.substr(0, colon), context),
                         parse_double(token.substr(colon + 1), context)};
      if (!workspace_contains(geometry, point))
        throw ConfigError(context + ": placement outside unit workspace");
      pattern.placements[static_cast<size_t>(i)] = point;
      any_active = true;
    }
    if (!any_active)
      throw ConfigError(context + ": pattern needs an active placement");
    library.push_back(std::move(pattern));
  }

  std::sort(library.begin(), library.end(),
            [](const TactilePattern& a, const TactilePattern& b) {
              return a.id < b.id;
            });
  return library;
}

TrialSchedule build_schedule(std::span<const int> ids, int repetitions,
                             std::uint64_t seed) {
  if (ids.empty()) throw std::invalid_argument("schedule needs pattern ids");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");

  TrialSchedule schedule;
  schedule.repetitions = repetitions;
  schedule.seed = seed;
  schedule.trials.reserve(ids.size() * static_cast<size_t>(repetitions));
  for (int id : ids)
    for (int r = 0; r < repetitions; ++r) schedule.trials.push_back(id);

  // Fisher-Yates with an explicit generator so the order is identical on
  // every platform for a given seed.
  std::uint64_t state = seed;
  for (size_t i = schedule.trials.size() - 1; i > 0; --i) {
    const size_t j = next_u64(state) % (i + 1);
    std::swap(schedule.trials[i], schedule.trials[j]);
  }
  return schedule;
}

std::vector<DeviceTraceRow> render_pattern(const TactilePattern& pattern,
                                           DeviceSim& device, double tick_s,
                                           const ContactPoint& home) {
  if (!(tick_s > 0.0)) throw std::invalid_argument("tick must be positive");

  std::array<ContactPoint, kUnitCount> commands;
  for (int i = 0; i < kUnitCount; ++i) {
    const auto& placement = pattern.placements[static_cast<size_t>(i)];
    commands[static_cast<size_t>(i)] = placement ? *placement : home;
  }

  const int steps = static_cast<int>(std::llround(pattern.duration_s / tick_s));
  std::vector<DeviceTraceRow> trace;
  trace.reserve(static_cast<size_t>(steps) * kUnitCount);
  for (int k = 0; k < steps; ++k) {
    if (auto err = device.tick(commands, tick_s))
      throw std::runtime_error(std::string("render error: ") + to_string(*err));
    device.append_trace(trace);
  }
  return trace;
}

void home_all(DeviceSim& device, const ContactPoint& home, double settle_s,
              double tick_s) {
  const int steps = static_cast<int>(std::llround(settle_s / tick_s));
  const std::array<ContactPoint, kUnitCount> commands{home, home, home};
  for (int k = 0; k < steps; ++k) {
    if (auto err = device.tick(commands, tick_s))
      throw std::runtime_error(std::string("homing error: ") + to_string(*err));
  }
}

ConfusionMatrix::ConfusionMatrix(std::vector<int> labels)
    : labels_(std::move(labels)),
      counts_(labels_.size() * labels_.size(), 0) {
  if (labels_.empty())
    throw std::invalid_argument("confusion matrix needs labels");
}

ConfusionMatrix ConfusionMatrix::from_log(
    std::span<const std::pair<int, int>> actual_predicted,
    std::vector<int> labels) {
  ConfusionMatrix matrix(std::move(labels));
  for (const auto& [actual, predicted] : actual_predicted)
    matrix.add(actual, predicted);
  return matrix;
}

int ConfusionMatrix::index_of(int label) const {
  for (size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  throw std::out_of_range("unknown pattern id " + std::to_string(label));
}

void ConfusionMatrix::add(int actual, int predicted) {
  const auto row = static_cast<size_t>(index_of(actual));
  const auto col = static_cast<size_t>(index_of(predicted));
  ++counts_[row * labels_.size() + col];
  ++total_;
}

long long ConfusionMatrix::count(int actual, int predicted) const {
  return counts_[static_cast<size_t>(index_of(actual)) * labels_.size() +
                 static_cast<size_t>(index_of(predicted))];
}

long long ConfusionMatrix::row_total(int actual) const {
  const auto row = static_cast<size_t>(index_of(actual));
  long long sum = 0;
  for (size_t j = 0; j < labels_.size(); ++j)
    sum += counts_[row * labels_.size() + j];
  return sum;
}

double ConfusionMatrix::row_percent(int actual, int predicted) const {
  const long long row_sum = row_total(actual);
  if (row_sum == 0) return 0.0;
  return 100.0 * static_cast<double>(count(actual, predicted)) /
         static_cast<double>(row_sum);
}

double ConfusionMatrix::recognition_rate() const {
  if (total_ == 0) return 0.0;
  long long diagonal = 0;
  for (size_t i = 0; i < labels_.size(); ++i)
    diagonal += counts_[i * labels_.size() + i];
  return static_cast<double>(diagonal) / static_cast<double>(total_);
}

void ConfusionMatrix::write_report(std::ostream& out) const {
  out << "# confusion matrix counts (rows actual, columns predicted)\n";
  out << "actual";
  for (int label : labels_) out << ',' << label;
  out << ",row_total\n";
  for (int row_label : labels_) {
    out << row_label;
    for (int col_label : labels_) out << ',' << count(row_label, col_label);
    out << ',' << row_total(row_label) << '\n';
  }
  out << "# row percentages\n";
  for (int row_label : labels_) {
    out << row_label;
    for (int col_label : labels_)
      out << ',' << format_fixed1(row_percent(row_label, col_label));
    out << '\n';
  }
  out << "recognition_rate_percent,"
      << format_fixed1(100.0 * recognition_rate()) << '\n';
}

}  // namespace tactsim
