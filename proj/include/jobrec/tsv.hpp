#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jobrec/common.hpp"

namespace jobrec::tsv {

// Line-oriented reader that tracks the line number for diagnostics and
// skips '#' comment lines (provenance headers).
class Reader {
 public:
  explicit Reader(const std::string& path);

  // Returns false at end of file.
  bool next(std::vector<std::string_view>& fields);
  // Reads the header row and checks it against the expected column names.
  void expect_header(std::span<const std::string_view> columns);

  [[noreturn]] void fail(std::string_view what) const;

  std::size_t line_number() const { return line_no_; }
  const std::string& path() const { return path_; }
  // Provenance lines seen so far, without the leading "# ".
  const std::vector<std::string>& comments() const { return comments_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::vector<std::string> comments_;
};

void split(std::string_view line, char sep, std::vector<std::string_view>& out);

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return value;
}

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace jobrec::tsv
