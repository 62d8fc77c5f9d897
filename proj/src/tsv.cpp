#include "jobrec/tsv.hpp"

#include <array>
#include <cstdio>

namespace jobrec::tsv {

Reader::Reader(const std::string& path) : path_(path), in_(path) {
  if (!in_) throw Error("cannot open " + path);
}

bool Reader::next(std::vector<std::string_view>& fields) {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (!line_.empty() && line_[0] == '#') {
      std::string_view body(line_);
      body.remove_prefix(1);
      if (!body.empty() && body[0] == ' ') body.remove_prefix(1);
      comments_.emplace_back(body);
      continue;
    }
    split(line_, '\t', fields);
    return true;
  }
  return false;
}

void Reader::expect_header(std::span<const std::string_view> columns) {
  std::vector<std::string_view> fields;
  if (!next(fields)) fail("missing header row");
  if (fields.size() != columns.size()) fail("unexpected header column count");
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (fields[k] != columns[k]) {
      fail("unexpected header column '" + std::string(fields[k]) + "', expected '" +
           std::string(columns[k]) + "'");
    }
  }
}

void Reader::fail(std::string_view what) const {
  throw Error(path_ + ":" + std::to_string(line_no_) + ": " + std::string(what));
}

void split(std::string_view line, char sep, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("double formatting failed");
  return std::string(buf.data(), ptr);
}

}  // namespace jobrec::tsv
