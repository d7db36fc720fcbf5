#pragma once

// Small CSV and number-formatting helpers shared by the readers and writers.
// highD files are plain comma-separated values without quoting; list-valued
// fields (lane markings) use ';' inside one cell.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lcdur::text {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Shortest representation that parses back to the same double.
std::string format_shortest(double v);
/// Fixed-point with the given number of decimals.
std::string format_fixed(double v, int decimals);

/// A CSV file with a header row, held in memory.
class CsvTable {
 public:
  /// Throws MissingFile if the file cannot be opened and MalformedRow if a
  /// data row has a different number of fields than the header.
  static CsvTable read(const std::filesystem::path& path);

  /// Throws MalformedRow if the column is absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  std::size_t row_count() const { return rows_.size(); }
  std::string_view cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  /// 1-based line number of a data row in the source file.
  std::size_t line_number(std::size_t row) const { return line_numbers_[row]; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> line_numbers_;
};

}  // namespace lcdur::text
