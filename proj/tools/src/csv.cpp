#include "csv.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "potwb/errors.hpp"

namespace potwb::cli {

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw UsageError(fmt::format("csv row has {} cells, header has {}", cells.size(), header_.size()));
  }
  rows_.push_back(std::move(cells));
}

std::size_t CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw UsageError(fmt::format("no csv column '{}'", name));
}

std::vector<double> CsvTable::numbers(std::string_view name) const {
  const auto k = column_index(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) {
    out.push_back(r[k].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(r[k]));
  }
  return out;
}

std::vector<std::string> CsvTable::strings(std::string_view name) const {
  const auto k = column_index(name);
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[k]);
  return out;
}

std::string CsvTable::str() const {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_escape(cells[i]);
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string num(double x) {
  if (std::isnan(x)) return {};
  return fmt::format("{:.10g}", x);
}

std::string integer(long long x) { return fmt::format("{}", x); }

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace potwb::cli
