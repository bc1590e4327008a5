#include "tactsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tactsim {
namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse_string(std::string_view text,
                                        std::string source_name) {
  KeyValueFile file;
  file.source_ = std::move(source_name);
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(file.source_ + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    std::string key{trim(line.substr(0, eq))};
    std::string value{trim(line.substr(eq + 1))};
    if (key.empty())
      throw ConfigError(file.source_ + ":" + std::to_string(line_no) +
                        ": empty key");
    file.entries_.emplace_back(std::move(key), std::move(value));
  }
  return file;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

bool KeyValueFile::has(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->first == key) return true;
  return false;
}

const std::string& KeyValueFile::str(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->first == key) return it->second;
  throw ConfigError(source_ + ": missing key '" + std::string(key) + "'");
}

double KeyValueFile::number(std::string_view key) const {
  const std::string& raw = str(key);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (ec != std::errc{} || ptr != raw.data() + raw.size() ||
      !std::isfinite(value))
    throw ConfigError(source_ + ": key '" + std::string(key) +
                      "' is not a finite number: '" + raw + "'");
  return value;
}

double KeyValueFile::number_or(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

}  // namespace tactsim
