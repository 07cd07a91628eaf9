#pragma once

// Deterministic text output: shortest round-trip float formatting and CSV
// tables written column by column.

#include <filesystem>
#include <string>
#include <vector>

namespace pentapulse {

/// Shortest decimal string that parses back to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // columns[c][row]

  void add(std::string name, std::vector<double> values);
  std::size_t rows() const;
  /// Throws InvalidInput when the columns have different lengths.
  std::string to_string() const;
};

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pentapulse
