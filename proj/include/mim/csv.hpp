#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mim {

/// Shortest text that round-trips the double; "nan" / "inf" / "-inf" otherwise.
std::string format_double(double v);

/// CSV table written as "# config_hash=<hash>", the header row, then rows.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::size_t size() const { return rows_.size(); }
  std::string render(const std::string& config_hash) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Builds a row from mixed cells.
struct Cell {
  std::string text;
  Cell(const std::string& s) : text(s) {}
  Cell(const char* s) : text(s) {}
  Cell(double v) : text(format_double(v)) {}
  Cell(int v) : text(std::to_string(v)) {}
  Cell(long v) : text(std::to_string(v)) {}
  Cell(unsigned long v) : text(std::to_string(v)) {}
  Cell(unsigned long long v) : text(std::to_string(v)) {}
  Cell(long long v) : text(std::to_string(v)) {}
  Cell(bool v) : text(v ? "1" : "0") {}
};
std::vector<std::string> row(std::initializer_list<Cell> cells);

/// FNV-1a 64-bit hash as 16 hex digits.
std::string hash_hex(const std::string& text);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace mim
