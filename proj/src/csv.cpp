#include "highway_rl/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "highway_rl/errors.hpp"

namespace highway_rl {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw FormatError("cannot write " + path.string());
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (const auto& c : columns) field(c);
  end_row();
}

CsvWriter& CsvWriter::field(std::string_view s) {
  if (!first_) out_ << ',';
  out_ << s;
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::field(long long v) { return field(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
  if (!out_) throw FormatError("write failed on " + path_.string());
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw FormatError("csv column '" + std::string(name) + "' not found");
}

double CsvTable::number(std::size_t row, std::string_view col) const {
  const std::string& s = rows.at(row).at(column(col));
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("csv value '" + s + "' in column '" + std::string(col) + "' is not numeric");
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
  t.columns = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.columns.size())
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns.size()) + " fields, got " + std::to_string(row.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace highway_rl
