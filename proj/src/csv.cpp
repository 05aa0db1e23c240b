#include "bscusum/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "bscusum/error.hpp"

namespace bscusum {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool skippable(std::string_view row) {
  const auto t = trim(row);
  return t.empty() || t.front() == '#';
}

}  // namespace

CsvColumnReader::CsvColumnReader(std::istream& in, std::size_t column, char delimiter)
    : in_(in), column_(column), delimiter_(delimiter) {}

std::optional<double> CsvColumnReader::parse_row(const std::string& row, bool& ok) const {
  std::string_view rest(row);
  for (std::size_t c = 0; c < column_; ++c) {
    const auto pos = rest.find(delimiter_);
    if (pos == std::string_view::npos) {
      ok = false;
      return std::nullopt;
    }
    rest = rest.substr(pos + 1);
  }
  const std::string_view field = trim(rest.substr(0, rest.find(delimiter_)));
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  ok = !field.empty() && ec == std::errc{} && ptr == field.data() + field.size() && std::isfinite(v);
  return ok ? std::optional<double>(v) : std::nullopt;
}

std::optional<double> CsvColumnReader::next() {
  std::string row;
  while (std::getline(in_, row)) {
    ++line_;
    if (skippable(row)) continue;
    bool ok = false;
    auto v = parse_row(row, ok);
    if (!ok) throw DataError("malformed CSV row at line " + std::to_string(line_));
    return v;
  }
  return std::nullopt;
}

std::vector<double> read_column(std::istream& in, std::size_t column, char delimiter) {
  CsvColumnReader reader(in, column, delimiter);
  std::vector<double> out;
  std::vector<std::size_t> bad;
  std::string row;
  while (std::getline(in, row)) {
    ++reader.line_;
    if (skippable(row)) continue;
    bool ok = false;
    const auto v = reader.parse_row(row, ok);
    if (ok)
      out.push_back(*v);
    else
      bad.push_back(reader.line_);
  }
  if (!bad.empty()) {
    std::string msg = "malformed CSV rows at line(s)";
    for (std::size_t i = 0; i < bad.size() && i < 20; ++i) msg += (i ? ", " : " ") + std::to_string(bad[i]);
    if (bad.size() > 20) msg += ", ... (" + std::to_string(bad.size()) + " total)";
    throw DataError(msg);
  }
  return out;
}

std::vector<double> read_column_file(const std::string& path, std::size_t column, char delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return read_column(in, column, delimiter);
}

}  // namespace bscusum
