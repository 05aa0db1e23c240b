#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace bscusum {

/// Pulls one numeric field per row from delimited text. Blank lines and lines
/// starting with '#' are skipped.
class CsvColumnReader {
 public:
  CsvColumnReader(std::istream& in, std::size_t column, char delimiter = ',');

  /// Next value; throws DataError naming the line on a malformed row.
  std::optional<double> next();
  std::size_t line() const noexcept { return line_; }

 private:
  std::optional<double> parse_row(const std::string& row, bool& ok) const;

  std::istream& in_;
  std::size_t column_;
  char delimiter_;
  std::size_t line_ = 0;
  friend std::vector<double> read_column(std::istream&, std::size_t, char);
};

/// Reads a whole column. A malformed row does not stop the scan; the error
/// lists every bad line number.
std::vector<double> read_column(std::istream& in, std::size_t column, char delimiter = ',');
std::vector<double> read_column_file(const std::string& path, std::size_t column, char delimiter = ',');

}  // namespace bscusum
