#include "cattle/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "cattle/types.hpp"

namespace cattle::csv {

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

Reader::Reader(const std::filesystem::path& path) : path_(path), in_(path) {
  if (!in_) throw ParseError("cannot open " + path.string());
  std::string header;
  if (!std::getline(in_, header)) throw ParseError(path.string() + ": missing header row");
  ++line_;
  if (!header.empty() && header.back() == '\r') header.pop_back();
  // Tolerate a UTF-8 byte-order mark.
  if (header.rfind("\xEF\xBB\xBF", 0) == 0) header.erase(0, 3);
  for (auto f : split(header)) header_.emplace_back(f);
}

int Reader::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return static_cast<int>(i);
  }
  throw ParseError(path_.string() + ": missing column '" + std::string(name) + "'");
}

bool Reader::has_column(std::string_view name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

bool Reader::next() {
  while (std::getline(in_, row_)) {
    ++line_;
    if (!row_.empty() && row_.back() == '\r') row_.pop_back();
    if (row_.empty()) continue;
    fields_ = split(row_);
    if (fields_.size() != header_.size()) {
      fail("expected " + std::to_string(header_.size()) + " fields, found " +
           std::to_string(fields_.size()));
    }
    return true;
  }
  return false;
}

std::string_view Reader::field(int col) const { return fields_.at(static_cast<std::size_t>(col)); }

std::int64_t Reader::int_field(int col) const {
  const auto f = field(col);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    fail("expected an integer, found '" + std::string(f) + "'");
  }
  return v;
}

double Reader::double_field(int col) const {
  const auto f = field(col);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    fail("expected a number, found '" + std::string(f) + "'");
  }
  return v;
}

void Reader::fail(const std::string& message) const {
  throw ParseError(path_.string() + ":" + std::to_string(line_) + ": " + message);
}

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s(buf);
  // "-0.000" -> "0.000"
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace cattle::csv
