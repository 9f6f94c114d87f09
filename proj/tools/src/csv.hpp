#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace potwb::cli {

/// In-memory table written as RFC-4180 CSV (quoted fields, LF line ends).
/// Plots read their data back from these tables, never from model objects.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);

  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  [[nodiscard]] std::size_t column_index(std::string_view name) const;
  /// Numeric column; empty cells read as NaN.
  [[nodiscard]] std::vector<double> numbers(std::string_view name) const;
  [[nodiscard]] std::vector<std::string> strings(std::string_view name) const;

  [[nodiscard]] std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// %.10g; NaN becomes an empty cell.
[[nodiscard]] std::string num(double x);
[[nodiscard]] std::string integer(long long x);
[[nodiscard]] std::string csv_escape(std::string_view field);

}  // namespace potwb::cli
