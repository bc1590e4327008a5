#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "tactsim/config.hpp"
#include "tactsim/device.hpp"

namespace tactsim {

// A static assignment of the three contact points: each unit is either
// inactive or pressed at a fixed point for `duration_s`.
struct TactilePattern {
  int id = 0;
  std::array<std::optional<ContactPoint>, kUnitCount> placements;
  double duration_s = 2.0;
};

using PatternLibrary = std::vector<TactilePattern>;

// Loads "pattern.<id> = <u0> <u1> <u2>" entries (tokens "<x>:<y>" in mm
// or "-" for inactive) plus an optional duration_s. Every active
// placement must lie in the unit's workspace and every pattern must
// have at least one active placement; violations raise ConfigError.
PatternLibrary load_pattern_library(const KeyValueFile& file,
                                    const LinkageGeometry& geometry);

struct TrialSchedule {
  std::vector<int> trials;
  int repetitions = 5;
  std::uint64_t seed = 0;
};

// Each id exactly `repetitions` times, order given by a seeded
// Fisher-Yates shuffle (deterministic per seed).
TrialSchedule build_schedule(std::span<const int> ids, int repetitions,
                             std::uint64_t seed);

// Delivers the pattern for its duration: active placements are
// commanded, inactive units go to `home`. Returns the device trace
// (one row per unit per tick).
std::vector<DeviceTraceRow> render_pattern(const TactilePattern& pattern,
                                           DeviceSim& device, double tick_s,
                                           const ContactPoint& home);

// Commands every unit to `home` and runs the device until it settles.
void home_all(DeviceSim& device, const ContactPoint& home, double settle_s,
              double tick_s);

// Actual x predicted trial counts over a fixed label set.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<int> labels);

  static ConfusionMatrix from_log(
      std::span<const std::pair<int, int>> actual_predicted,
      std::vector<int> labels);

  void add(int actual, int predicted);  // throws std::out_of_range on unknown id

  const std::vector<int>& labels() const { return labels_; }
  long long count(int actual, int predicted) const;
  long long row_total(int actual) const;
  long long total() const { return total_; }
  // 100 * count / row_total; 0 for an empty row.
  double row_percent(int actual, int predicted) const;
  // Fraction of diagonal trials, in [0, 1].
  double recognition_rate() const;

  void write_report(std::ostream& out) const;

 private:
  int index_of(int label) const;

  std::vector<int> labels_;
  std::vector<long long> counts_;  // row-major labels x labels
  long long total_ = 0;
};

}  // namespace tactsim
