#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tactsim/device.hpp"

namespace tactsim::proto {

// Wire format: one ASCII line per message, single linefeed terminator,
// fields separated by single spaces, numbers as shortest round-trippable
// decimals.
//
//   HELLO <version>          session handshake
//   SET <unit> <x> <y>       command one unit to (x, y) mm
//   FRC <unit> <force>       force telemetry, one line per unit per tick
//   CAL                      run non-touch calibration
//   ERR <code> <text>        error reply; see kErr* codes
struct Hello {
  std::int64_t version = 1;
};
struct SetTarget {
  int unit = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
};
struct ForceReport {
  int unit = 0;
  double force_n = 0.0;
};
struct Calibrate {};
struct ErrorMsg {
  std::int64_t code = 0;
  std::string text;
};

using Message = std::variant<Hello, SetTarget, ForceReport, Calibrate, ErrorMsg>;

inline constexpr std::int64_t kErrMalformed = 1;
inline constexpr std::int64_t kErrUnreachable = 2;
inline constexpr std::int64_t kErrNotInNonTouchPose = 3;

inline constexpr std::int64_t kProtocolVersion = 1;

// Throws std::invalid_argument when a message invariant is broken
// (unit out of range, non-finite number, line terminator in text).
std::string encode(const Message& msg);

struct MalformedLine {
  std::string reason;
};
using DecodeResult = std::variant<Message, MalformedLine>;

// Never throws; any byte sequence yields a Message or a MalformedLine.
// Accepts one optional trailing linefeed.
DecodeResult decode(std::string_view line);

enum class SessionPhase { AwaitingHello, Active, Closed };

// Transport-free session state machine. HELLO activates the session;
// SET and CAL are accepted only while Active; every fed line produces
// either one reply line or one forwarded device command. Telemetry is
// three FRC lines per tick while Active.
class Session {
 public:
  struct DeviceHooks {
    std::function<std::optional<DeviceError>(int, ContactPoint)> set_target;
    std::function<std::optional<DeviceError>()> calibrate;
    std::function<std::array<double, kUnitCount>()> forces;
  };

  explicit Session(DeviceHooks hooks, double tick_period_s = 0.01);

  // Handles one input line (with or without trailing newline) and
  // returns the encoded replies. Never throws on malformed input.
  std::vector<std::string> feed_line(std::string_view line);

  // Telemetry for one elapsed tick period.
  std::vector<std::string> on_tick();

  SessionPhase phase() const { return phase_; }
  double tick_period() const { return tick_period_s_; }
  void close() { phase_ = SessionPhase::Closed; }

 private:
  DeviceHooks hooks_;
  double tick_period_s_;
  SessionPhase phase_ = SessionPhase::AwaitingHello;
};

}  // namespace tactsim::proto
