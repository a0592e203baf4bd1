#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace kgsm::csv {

/// `%.17g` formatting; round-trips every finite double.
std::string format_double(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Parsed table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws std::out_of_range if absent.
  std::size_t column_index(std::string_view name) const;
  std::vector<double> numeric_column(std::string_view name) const;
};

/// Strict RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line
/// ends, equal field counts on every record. Throws std::runtime_error.
Table read(std::istream& in);

} // namespace kgsm::csv
