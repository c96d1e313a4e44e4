#pragma once
// Minimal CSV reader/writer: header row, comma separator, optional RFC-4180
// quoting, '.' decimal separator, empty cell = missing. Doubles are written
// with shortest round-trip formatting so files re-read bit-exactly.

#include <optional>
#include <string>
#include <vector>

namespace agrignn {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // ragged rows are a parse error

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Strict double parse of a whole cell; nullopt for empty, throws input_error
/// for junk. `context` feeds the error message (column/row).
std::optional<double> parse_cell(const std::string& cell, const std::string& context);

/// Shortest representation that round-trips through parse_cell.
std::string format_double(double v);

}  // namespace agrignn
