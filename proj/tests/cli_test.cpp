#include "tactsim/cli.hpp"

#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tactsim/patterns.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"tactsim"};
  for (const auto& arg : args) argv.push_back(arg.c_str());
  return tactsim::cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tactsim_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int counter() {
    static int n = 0;
    return n++;
  }
};

const std::string kGeometry = std::string(TACTSIM_CONFIG_DIR) + "/geometry.cfg";
const std::string kPatterns = std::string(TACTSIM_CONFIG_DIR) + "/patterns.cfg";

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("impedance trace shape and content") {
  TempDir tmp;
  const auto out = (tmp.path / "trace.csv").string();

  SUBCASE("201 rows for two seconds at 100 Hz") {
    REQUIRE(run_cli({"impedance", "--geometry", kGeometry, "--preset", "P1",
                     "--duration", "2", "--tick", "0.01", "--out", out}) == 0);
    const auto lines = split_lines(read_file(out));
    REQUIRE(lines.size() == 202);
    CHECK(lines[0] == "time_s,commanded_y_mm,actual_y_mm,palm_y_mm,force_n");
    CHECK(lines[1].starts_with("0,30,28,30,0"));
  }
  SUBCASE("duration zero writes a header-only file") {
    REQUIRE(run_cli({"impedance", "--geometry", kGeometry, "--preset", "P1",
                     "--duration", "0", "--out", out}) == 0);
    CHECK(split_lines(read_file(out)).size() == 1);
  }
  SUBCASE("underdamped commanded trajectory crosses its final value") {
    REQUIRE(run_cli({"impedance", "--geometry", kGeometry, "--preset", "P1",
                     "--duration", "2", "--out", out}) == 0);
    const auto lines = split_lines(read_file(out));
    std::vector<double> commanded;
    for (size_t i = 1; i < lines.size(); ++i) {
      const auto first_comma = lines[i].find(',');
      const auto second_comma = lines[i].find(',', first_comma + 1);
      commanded.push_back(std::stod(
          lines[i].substr(first_comma + 1, second_comma - first_comma - 1)));
    }
    const double final_value = commanded.back();
    int crossings = 0;
    for (size_t i = 2; i < commanded.size(); ++i)
      if ((commanded[i - 1] - final_value) * (commanded[i] - final_value) < 0)
        ++crossings;
    CHECK(crossings >= 1);
  }
  SUBCASE("explicit parameters and a force profile") {
    const auto profile = (tmp.path / "profile.txt").string();
    std::ofstream(profile) << "1\n1\n0.5\n0\n";
    REQUIRE(run_cli({"impedance", "--geometry", kGeometry, "--mass", "1",
                     "--damping", "2", "--stiffness", "1", "--force-profile",
                     profile, "--out", out}) == 0);
    // header + t=0 row + one row per profile entry
    CHECK(split_lines(read_file(out)).size() == 6);
  }
}

TEST_CASE("impedance argument validation") {
  CHECK(run_cli({"impedance", "--geometry", kGeometry, "--preset", "P4"}) == 2);
  CHECK(run_cli({"impedance", "--geometry", kGeometry, "--mass", "1"}) == 2);
  CHECK(run_cli({"impedance", "--geometry", "/nonexistent.cfg"}) == 2);
  CHECK(run_cli({"impedance", "--bogus-flag"}) == 1);
  CHECK(run_cli({}) == 1);
}

TEST_CASE("experiment with a scripted response file") {
  TempDir tmp;
  const auto log = (tmp.path / "log.csv").string();
  const auto report = (tmp.path / "report.csv").string();
  const auto responses = (tmp.path / "responses.txt").string();

  // Perfect responses must follow the seeded schedule order.
  const std::vector<int> ids{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  const auto schedule = tactsim::build_schedule(ids, 5, 42);
  {
    std::ofstream out(responses);
    for (int id : schedule.trials) out << id << "\n";
  }

  REQUIRE(run_cli({"experiment", "--geometry", kGeometry, "--patterns",
                   kPatterns, "--seed", "42", "--responses", responses,
                   "--out", log, "--report", report}) == 0);

  const auto log_lines = split_lines(read_file(log));
  REQUIRE(log_lines.size() == 56);  // header + 55 trials
  CHECK(log_lines[0] == "trial,actual_id,predicted_id");

  const auto report_text = read_file(report);
  CHECK(report_text.find("recognition_rate_percent,100.0\n") !=
        std::string::npos);

  SUBCASE("analyze reproduces the report from the log") {
    const auto report2 = (tmp.path / "report2.csv").string();
    REQUIRE(run_cli({"analyze", "--log", log, "--report", report2}) == 0);
    CHECK(read_file(report2).find("recognition_rate_percent,100.0\n") !=
          std::string::npos);
  }
}

TEST_CASE("experiment rejects a short response file") {
  TempDir tmp;
  const auto responses = (tmp.path / "responses.txt").string();
  {
    std::ofstream out(responses);
    for (int i = 0; i < 54; ++i) out << "1\n";
  }
  CHECK(run_cli({"experiment", "--geometry", kGeometry, "--patterns",
                 kPatterns, "--seed", "42", "--responses", responses, "--out",
                 (tmp.path / "log.csv").string()}) == 3);
}

TEST_CASE("seeded runs are byte-identical") {
  TempDir tmp;
  const auto out1 = (tmp.path / "a.csv").string();
  const auto out2 = (tmp.path / "b.csv").string();

  SUBCASE("impedance") {
    for (const auto& out : {out1, out2})
      REQUIRE(run_cli({"impedance", "--geometry", kGeometry, "--preset", "P1",
                       "--duration", "1", "--seed", "9", "--out", out}) == 0);
    CHECK(read_file(out1) == read_file(out2));
  }
  SUBCASE("experiment") {
    const auto responses = (tmp.path / "responses.txt").string();
    const std::vector<int> ids{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    const auto schedule = tactsim::build_schedule(ids, 5, 9);
    {
      std::ofstream out(responses);
      for (int id : schedule.trials) out << id << "\n";
    }
    const auto report1 = (tmp.path / "r1.csv").string();
    const auto report2 = (tmp.path / "r2.csv").string();
    REQUIRE(run_cli({"experiment", "--geometry", kGeometry, "--patterns",
                     kPatterns, "--seed", "9", "--responses", responses,
                     "--out", out1, "--report", report1}) == 0);
    REQUIRE(run_cli({"experiment", "--geometry", kGeometry, "--patterns",
                     kPatterns, "--seed", "9", "--responses", responses,
                     "--out", out2, "--report", report2}) == 0);
    CHECK(read_file(out1) == read_file(out2));
    CHECK(read_file(report1) == read_file(report2));
  }
}

TEST_SUITE_END();
