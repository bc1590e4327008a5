#include "tactsim/protocol.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "oracles.hpp"

using namespace tactsim;
using namespace tactsim::proto;

namespace {

bool messages_equal(const Message& a, const Message& b) {
  if (a.index() != b.index()) return false;
  if (const auto* h = std::get_if<Hello>(&a))
    return h->version == std::get<Hello>(b).version;
  if (const auto* s = std::get_if<SetTarget>(&a)) {
    const auto& o = std::get<SetTarget>(b);
    return s->unit == o.unit && s->x_mm == o.x_mm && s->y_mm == o.y_mm;
  }
  if (const auto* f = std::get_if<ForceReport>(&a)) {
    const auto& o = std::get<ForceReport>(b);
    return f->unit == o.unit && f->force_n == o.force_n;
  }
  if (std::get_if<Calibrate>(&a)) return true;
  const auto& e = std::get<ErrorMsg>(a);
  const auto& o = std::get<ErrorMsg>(b);
  return e.code == o.code && e.text == o.text;
}

double random_finite(oracle::Rng& rng) {
  switch (rng.uniform_int(0, 3)) {
    case 0:
      return rng.uniform(-100.0, 100.0);
    case 1:
      return static_cast<double>(rng.uniform_int(-1000, 1000));
    case 2:
      return rng.uniform(-1.0, 1.0) * 1e-6;
    default:
      return rng.uniform(-1.0, 1.0) * 1e12;
  }
}

Message random_message(oracle::Rng& rng) {
  switch (rng.uniform_int(0, 4)) {
    case 0:
      return Hello{rng.uniform_int(0, 1000000)};
    case 1:
      return SetTarget{rng.uniform_int(0, 2), random_finite(rng),
                       random_finite(rng)};
    case 2:
      return ForceReport{rng.uniform_int(0, 2), random_finite(rng)};
    case 3:
      return Calibrate{};
    default: {
      static const char* texts[] = {"",          "bad thing",
                                    "x",         "unit out of range",
                                    "a b c d e", "code-42"};
      return ErrorMsg{rng.uniform_int(-5, 500),
                      texts[rng.uniform_int(0, 5)]};
    }
  }
}

Session::DeviceHooks counting_hooks(int& sets, int& calibrations,
                                    std::optional<DeviceError> set_result,
                                    std::optional<DeviceError> cal_result) {
  return Session::DeviceHooks{
      [&sets, set_result](int, ContactPoint) {
        ++sets;
        return set_result;
      },
      [&calibrations, cal_result] {
        ++calibrations;
        return cal_result;
      },
      [] {
        return std::array<double, 3>{0.5, 1.0, 1.5};
      },
  };
}

}  // namespace

TEST_SUITE_BEGIN("protocol");

TEST_CASE("encode produces the exact wire lines") {
  CHECK(encode(SetTarget{0, 10.0, -5.0}) == "SET 0 10 -5\n");
  CHECK(encode(ForceReport{2, 0.5}) == "FRC 2 0.5\n");
  CHECK(encode(Hello{1}) == "HELLO 1\n");
  CHECK(encode(Calibrate{}) == "CAL\n");
  CHECK(encode(ErrorMsg{2, "target unreachable"}) ==
        "ERR 2 target unreachable\n");
  CHECK(encode(ErrorMsg{7, ""}) == "ERR 7\n");
}

TEST_CASE("encode rejects invariant violations") {
  CHECK_THROWS_AS(encode(SetTarget{3, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(encode(SetTarget{0, std::nan(""), 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(encode(ForceReport{0, INFINITY}), std::invalid_argument);
  CHECK_THROWS_AS(encode(ErrorMsg{1, "two\nlines"}), std::invalid_argument);
}

TEST_CASE("decode handles the documented examples") {
  SUBCASE("valid lines") {
    const auto set = decode("SET 1 0.0 30.0\n");
    const auto* msg = std::get_if<Message>(&set);
    REQUIRE(msg != nullptr);
    const auto& target = std::get<SetTarget>(*msg);
    CHECK(target.unit == 1);
    CHECK(target.x_mm == 0.0);
    CHECK(target.y_mm == 30.0);

    CHECK(std::holds_alternative<Message>(decode("CAL")));
    CHECK(std::holds_alternative<Message>(decode("HELLO 3\n")));
    const auto err = decode("ERR 2 some text with spaces");
    const auto& parsed = std::get<ErrorMsg>(std::get<Message>(err));
    CHECK(parsed.code == 2);
    CHECK(parsed.text == "some text with spaces");
  }
  SUBCASE("malformed lines") {
    CHECK(std::holds_alternative<MalformedLine>(decode("SET 3 0 0\n")));
    CHECK(std::holds_alternative<MalformedLine>(decode("SET 1 0\n")));
    CHECK(std::holds_alternative<MalformedLine>(decode("SET 1 inf 0\n")));
    CHECK(std::holds_alternative<MalformedLine>(decode("SET 1 nan 0\n")));
    CHECK(std::holds_alternative<MalformedLine>(decode("")));
    CHECK(std::holds_alternative<MalformedLine>(decode("\n")));
    CHECK(std::holds_alternative<MalformedLine>(decode("NOPE 1 2\n")));
    CHECK(std::holds_alternative<MalformedLine>(decode("SET  1 0 0\n")));
    CHECK(std::holds_alternative<MalformedLine>(decode("CAL 1\n")));
    CHECK(std::holds_alternative<MalformedLine>(decode("set 1 0 0\n")));
  }
}

TEST_CASE("round trip identity over generated messages") {
  oracle::Rng rng(314159);
  for (int i = 0; i < 10000; ++i) {
    const Message msg = random_message(rng);
    const std::string line = encode(msg);
    const auto decoded = decode(line);
    const auto* back = std::get_if<Message>(&decoded);
    REQUIRE(back != nullptr);
    CHECK(messages_equal(msg, *back));
  }
}

TEST_CASE("decode survives arbitrary bytes") {
  oracle::Rng rng(271828);
  for (int i = 0; i < 10000; ++i) {
    std::string line;
    const int length = rng.uniform_int(0, 64);
    for (int k = 0; k < length; ++k) {
      // Mix printable garbage, digits, separators and raw bytes.
      switch (rng.uniform_int(0, 3)) {
        case 0:
          line.push_back(static_cast<char>(rng.uniform_int(32, 126)));
          break;
        case 1:
          line.push_back(static_cast<char>(rng.uniform_int(0, 255)));
          break;
        case 2:
          line.push_back(' ');
          break;
        default:
          line.push_back(static_cast<char>('0' + rng.uniform_int(0, 9)));
          break;
      }
    }
    const auto result = decode(line);
    CHECK((std::holds_alternative<Message>(result) ||
           std::holds_alternative<MalformedLine>(result)));
  }
}

TEST_CASE("session state machine") {
  int sets = 0, calibrations = 0;

  SUBCASE("SET before HELLO is refused and the session stays put") {
    Session session(counting_hooks(sets, calibrations, std::nullopt,
                                   std::nullopt));
    const auto replies = session.feed_line("SET 1 20 30\n");
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].starts_with("ERR 1 "));
    CHECK(session.phase() == SessionPhase::AwaitingHello);
    CHECK(sets == 0);
  }
  SUBCASE("HELLO activates and is acknowledged") {
    Session session(counting_hooks(sets, calibrations, std::nullopt,
                                   std::nullopt));
    const auto replies = session.feed_line("HELLO 1\n");
    REQUIRE(replies.size() == 1);
    CHECK(replies[0] == "HELLO 1\n");
    CHECK(session.phase() == SessionPhase::Active);
    CHECK(session.feed_line("HELLO 1\n")[0].starts_with("ERR 1 "));
  }
  SUBCASE("valid SET forwards without a reply") {
    Session session(counting_hooks(sets, calibrations, std::nullopt,
                                   std::nullopt));
    session.feed_line("HELLO 1\n");
    CHECK(session.feed_line("SET 0 20 32\n").empty());
    CHECK(sets == 1);
  }
  SUBCASE("unreachable SET maps to ERR 2") {
    Session session(counting_hooks(sets, calibrations,
                                   DeviceError::Unreachable, std::nullopt));
    session.feed_line("HELLO 1\n");
    const auto replies = session.feed_line("SET 0 1e6 1e6\n");
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].starts_with("ERR 2 "));
  }
  SUBCASE("calibration failure maps to ERR 3") {
    Session session(counting_hooks(sets, calibrations, std::nullopt,
                                   DeviceError::NotInNonTouchPose));
    session.feed_line("HELLO 1\n");
    const auto replies = session.feed_line("CAL\n");
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].starts_with("ERR 3 "));
    CHECK(calibrations == 1);
  }
  SUBCASE("server-to-client verbs from the client are refused") {
    Session session(counting_hooks(sets, calibrations, std::nullopt,
                                   std::nullopt));
    session.feed_line("HELLO 1\n");
    CHECK(session.feed_line("FRC 0 1\n")[0].starts_with("ERR 1 "));
    CHECK(session.feed_line("ERR 5 whatever\n")[0].starts_with("ERR 1 "));
  }
}

TEST_CASE("telemetry cadence in simulated time") {
  int sets = 0, calibrations = 0;
  Session session(counting_hooks(sets, calibrations, std::nullopt,
                                 std::nullopt),
                  0.01);

  // No telemetry before the handshake.
  CHECK(session.on_tick().empty());
  session.feed_line("HELLO 1\n");

  // One simulated second: exactly 3 lines per tick.
  int frc_lines = 0;
  for (int tick = 0; tick < 100; ++tick) {
    const auto lines = session.on_tick();
    CHECK(lines.size() == 3);
    for (const auto& line : lines) {
      CHECK(line.starts_with("FRC "));
      ++frc_lines;
    }
  }
  CHECK(frc_lines == 300);
  // Within 10% of the nominal rate without any slack needed.
  CHECK(std::abs(frc_lines - 300) <= 30);
}

TEST_CASE("session survives malformed byte streams") {
  int sets = 0, calibrations = 0;
  Session session(counting_hooks(sets, calibrations, std::nullopt,
                                 std::nullopt));
  session.feed_line("HELLO 1\n");
  oracle::Rng rng(777);
  for (int i = 0; i < 10000; ++i) {
    std::string line;
    const int length = rng.uniform_int(0, 48);
    for (int k = 0; k < length; ++k)
      line.push_back(static_cast<char>(rng.uniform_int(1, 255)));
    const auto replies = session.feed_line(line);
    // Every line yields at most one reply and never kills the session.
    CHECK(replies.size() <= 1);
    CHECK(session.phase() == SessionPhase::Active);
  }
}

TEST_SUITE_END();
