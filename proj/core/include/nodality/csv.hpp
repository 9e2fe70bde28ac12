#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nodality {

/// Parsed CSV table. The header row is kept separate from the data rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of the named column, or -1 when absent.
  int column(const std::string& name) const;
};

/// Reads a CSV document. Handles quoted fields, embedded commas and quotes,
/// and both LF and CRLF line endings. Throws std::runtime_error on ragged
/// rows or unterminated quotes.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trip-safe decimal rendering used for every numeric
/// artifact the library emits, so repeated runs are byte-identical.
std::string format_double(double value);

}  // namespace nodality
