#include "pentapulse/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "pentapulse/error.hpp"

namespace pentapulse {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void CsvTable::add(std::string name, std::vector<double> values) {
  header.push_back(std::move(name));
  columns.push_back(std::move(values));
}

std::size_t CsvTable::rows() const { return columns.empty() ? 0 : columns.front().size(); }

std::string CsvTable::to_string() const {
  if (header.size() != columns.size()) throw InvalidInput("CsvTable: header/column count mismatch");
  const std::size_t n = rows();
  for (const auto& c : columns) {
    if (c.size() != n) throw InvalidInput("CsvTable: columns differ in length");
  }
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(columns[c][r]);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace pentapulse
