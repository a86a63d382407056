#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace highway_rl {

/// Shortest decimal form that parses back to the same double ("nan"/"inf" for non-finite).
std::string format_double(double v);

/// Minimal comma-separated writer. No quoting: fields never contain commas.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& columns);
  CsvWriter& field(std::string_view s);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(bool v) { return field(static_cast<long long>(v ? 1 : 0)); }
  CsvWriter& empty_field() { return field(std::string_view{}); }
  void end_row();

 private:
  std::ofstream out_;
  bool first_ = true;
  std::filesystem::path path_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws FormatError if absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view col) const;
};

/// Reads a header + rows file. Throws FormatError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace highway_rl
