#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace cattle::csv {

/// Minimal reader for the unquoted comma-delimited files this project exchanges.
/// The header row is required; fields are addressed by column name.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);

  /// Column index of `name`; throws ParseError naming the file when absent.
  int column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  /// Advances to the next non-empty row. Returns false at end of file.
  bool next();

  std::string_view field(int col) const;
  std::int64_t int_field(int col) const;
  double double_field(int col) const;

  int line() const { return line_; }
  const std::filesystem::path& path() const { return path_; }

  /// "file:line: message", for error reporting.
  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::string row_;
  std::vector<std::string_view> fields_;
  int line_ = 0;
};

std::vector<std::string_view> split(std::string_view line, char delim = ',');

/// Shortest round-trippable decimal form.
std::string format_double(double v);

/// Fixed-point with `digits` decimals; negative zero is printed as 0.
std::string format_fixed(double v, int digits);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace cattle::csv
