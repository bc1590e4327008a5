#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tactsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "key = value" file. '#' starts a comment, blank lines are
// ignored, keys and values are whitespace-trimmed. Duplicate keys keep
// the last value; original order is preserved for iteration.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(std::string_view text,
                                   std::string source_name = "<string>");

  bool has(std::string_view key) const;
  const std::string& str(std::string_view key) const;  // throws ConfigError
  double number(std::string_view key) const;           // throws ConfigError
  double number_or(std::string_view key, double fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }
  const std::string& source_name() const { return source_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string source_;
};

}  // namespace tactsim
