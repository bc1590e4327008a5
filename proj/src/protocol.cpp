#include "tactsim/protocol.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "tactsim/csv.hpp"

namespace tactsim::proto {
namespace {

bool valid_unit(int unit) { return unit >= 0 && unit < kUnitCount; }

void require(bool condition, const char* what) {
  if (!condition) throw std::invalid_argument(what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  // Strict framing: single spaces, no leading/trailing/empty fields.
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    auto space = line.find(' ', start);
    if (space == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, space - start));
    start = space + 1;
  }
}

template <typename Int>
bool parse_int(std::string_view token, Int& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

bool parse_finite(std::string_view token, double& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size() &&
         std::isfinite(out);
}

}  // namespace

std::string encode(const Message& msg) {
  struct Encoder {
    std::string operator()(const Hello& m) const {
      return "HELLO " + format_int(m.version) + "\n";
    }
    std::string operator()(const SetTarget& m) const {
      require(valid_unit(m.unit), "SET unit out of range");
      require(std::isfinite(m.x_mm) && std::isfinite(m.y_mm),
              "SET coordinates must be finite");
      return "SET " + format_int(m.unit) + " " + format_number(m.x_mm) + " " +
             format_number(m.y_mm) + "\n";
    }
    std::string operator()(const ForceReport& m) const {
      require(valid_unit(m.unit), "FRC unit out of range");
      require(std::isfinite(m.force_n), "FRC force must be finite");
      return "FRC " + format_int(m.unit) + " " + format_number(m.force_n) +
             "\n";
    }
    std::string operator()(const Calibrate&) const { return "CAL\n"; }
    std::string operator()(const ErrorMsg& m) const {
      require(m.text.find('\n') == std::string::npos &&
                  m.text.find('\r') == std::string::npos,
              "ERR text must not contain line terminators");
      require(m.text.empty() || m.text.front() != ' ',
              "ERR text must not start with a space");
      std::string line = "ERR " + format_int(m.code);
      if (!m.text.empty()) line += " " + m.text;
      return line + "\n";
    }
  };
  return std::visit(Encoder{}, msg);
}

DecodeResult decode(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (line.empty()) return MalformedLine{"empty line"};
  if (line.find('\n') != std::string_view::npos)
    return MalformedLine{"embedded line terminator"};

  const auto fields = split_fields(line);
  for (size_t i = 0; i + 1 < fields.size(); ++i)
    if (fields[i].empty()) return MalformedLine{"empty field"};

  const std::string_view verb = fields[0];
  if (verb == "HELLO") {
    std::int64_t version = 0;
    if (fields.size() != 2) return MalformedLine{"HELLO expects 1 field"};
    if (!parse_int(fields[1], version))
      return MalformedLine{"HELLO version must be an integer"};
    return Message{Hello{version}};
  }
  if (verb == "SET") {
    if (fields.size() != 4) return MalformedLine{"SET expects 3 fields"};
    int unit = 0;
    double x = 0.0, y = 0.0;
    if (!parse_int(fields[1], unit) || !valid_unit(unit))
      return MalformedLine{"SET unit must be 0..2"};
    if (!parse_finite(fields[2], x) || !parse_finite(fields[3], y))
      return MalformedLine{"SET coordinates must be finite numbers"};
    return Message{SetTarget{unit, x, y}};
  }
  if (verb == "FRC") {
    if (fields.size() != 3) return MalformedLine{"FRC expects 2 fields"};
    int unit = 0;
    double force = 0.0;
    if (!parse_int(fields[1], unit) || !valid_unit(unit))
      return MalformedLine{"FRC unit must be 0..2"};
    if (!parse_finite(fields[2], force))
      return MalformedLine{"FRC force must be a finite number"};
    return Message{ForceReport{unit, force}};
  }
  if (verb == "CAL") {
    if (fields.size() != 1) return MalformedLine{"CAL takes no fields"};
    return Message{Calibrate{}};
  }
  if (verb == "ERR") {
    if (fields.size() < 2) return MalformedLine{"ERR expects a code"};
    std::int64_t code = 0;
    if (!parse_int(fields[1], code))
      return MalformedLine{"ERR code must be an integer"};
    std::string text;
    if (fields.size() > 2) {
      const auto* begin = fields[2].data();
      text.assign(begin, line.data() + line.size() - begin);
    }
    return Message{ErrorMsg{code, std::move(text)}};
  }
  return MalformedLine{"unknown verb"};
}

Session::Session(DeviceHooks hooks, double tick_period_s)
    : hooks_(std::move(hooks)), tick_period_s_(tick_period_s) {
  if (!(tick_period_s_ > 0.0))
    throw std::invalid_argument("tick period must be positive");
}

std::vector<std::string> Session::feed_line(std::string_view line) {
  std::vector<std::string> replies;
  if (phase_ == SessionPhase::Closed) return replies;

  auto reply_error = [&](std::int64_t code, std::string text) {
    replies.push_back(encode(ErrorMsg{code, std::move(text)}));
  };

  const DecodeResult result = decode(line);
  if (const auto* malformed = std::get_if<MalformedLine>(&result)) {
    reply_error(kErrMalformed, malformed->reason);
    return replies;
  }

  const Message& msg = std::get<Message>(result);
  struct Handler {
    Session& session;
    std::vector<std::string>& replies;
    decltype(reply_error)& reply;

    void operator()(const Hello&) {
      if (session.phase_ != SessionPhase::AwaitingHello) {
        reply(kErrMalformed, "unexpected HELLO");
        return;
      }
      session.phase_ = SessionPhase::Active;
      replies.push_back(encode(Hello{kProtocolVersion}));
    }
    void operator()(const SetTarget& m) {
      if (session.phase_ != SessionPhase::Active) {
        reply(kErrMalformed, "HELLO required before SET");
        return;
      }
      if (auto err =
              session.hooks_.set_target(m.unit, ContactPoint{m.x_mm, m.y_mm}))
        reply(kErrUnreachable, to_string(*err));
    }
    void operator()(const Calibrate&) {
      if (session.phase_ != SessionPhase::Active) {
        reply(kErrMalformed, "HELLO required before CAL");
        return;
      }
      if (auto err = session.hooks_.calibrate())
        reply(kErrNotInNonTouchPose, to_string(*err));
    }
    void operator()(const ForceReport&) {
      reply(kErrMalformed, "FRC is server-to-client");
    }
    void operator()(const ErrorMsg&) {
      reply(kErrMalformed, "ERR is server-to-client");
    }
  };
  std::visit(Handler{*this, replies, reply_error}, msg);
  return replies;
}

std::vector<std::string> Session::on_tick() {
  std::vector<std::string> lines;
  if (phase_ != SessionPhase::Active) return lines;
  const auto forces = hooks_.forces();
  lines.reserve(kUnitCount);
  for (int i = 0; i < kUnitCount; ++i)
    lines.push_back(
        encode(ForceReport{i, forces[static_cast<size_t>(i)]}));
  return lines;
}

}  // namespace tactsim::proto
