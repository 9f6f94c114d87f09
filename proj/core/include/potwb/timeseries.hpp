#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace potwb {

using Date = std::chrono::year_month_day;

/// Missing-value code in series files.
inline constexpr double kMissingSentinel = -9999.0;

/// Daily precipitation record. Missing days are NaN in `values`.
struct DailySeries {
  std::string station_id;
  std::vector<Date> dates;
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const { return dates.size(); }
  [[nodiscard]] static bool is_missing(double v);
  [[nodiscard]] std::size_t missing_count() const;
  [[nodiscard]] int first_year() const;
  [[nodiscard]] int last_year() const;
};

struct Season {
  enum class Kind { all, djf, jja, month };
  Kind kind = Kind::all;
  unsigned month = 0;  ///< 1..12 when kind == month

  [[nodiscard]] static Season parse(std::string_view text);  ///< "all", "DJF", "JJA", "1".."12"
  [[nodiscard]] bool contains(unsigned month_of_year) const;
  [[nodiscard]] std::string name() const;
};

struct Exceedance {
  Date date;
  double excess;
};

struct ExceedanceTable {
  double threshold = 0.0;
  std::vector<Exceedance> excesses;
  /// Non-missing days of the (filtered) series divided by 365.25.
  double record_years = 0.0;
  Season season;

  [[nodiscard]] std::vector<double> excess_values() const;
  [[nodiscard]] std::size_t count() const { return excesses.size(); }
};

/// Excesses (y1 - u1, y2 - u2) on a day when both series are present and at
/// least one value exceeds its threshold; the other coordinate may be <= 0.
struct PairedExceedance {
  Date date;
  std::array<double, 2> excess;
};

struct PairedExceedanceTable {
  std::array<double, 2> threshold{0.0, 0.0};
  std::vector<PairedExceedance> pairs;
  /// Days present in both series divided by 365.25.
  double record_years = 0.0;

  [[nodiscard]] std::vector<std::array<double, 2>> points() const;
  [[nodiscard]] std::size_t count() const { return pairs.size(); }
};

struct WindowPlan {
  int window_years = 20;
  int step_years = 1;
  int min_exceedances = 50;

  void validate() const;
};

struct SeriesWindow {
  int start_year = 0;
  int end_year = 0;  ///< inclusive
  ExceedanceTable table;
  bool insufficient = false;
};

struct YearCount {
  int year = 0;
  int count = 0;
  double missing_fraction = 0.0;  ///< of the calendar year, days outside the record included
  bool flagged = false;           ///< missing_fraction > 0.2
};

struct StationInfo {
  std::string station_id;
  std::filesystem::path file;  ///< resolved against the manifest directory
  double lon = 0.0;
  double lat = 0.0;
  std::string name;
};

/// Reads a `date,value` CSV with ISO dates. Throws ParseError for malformed
/// rows (with line number) and FormatError for non-increasing dates.
[[nodiscard]] DailySeries load_series(const std::filesystem::path& path,
                                      std::string station_id = {});
[[nodiscard]] DailySeries parse_series(std::string_view csv, std::string station_id = {});
void write_series(const DailySeries& s, const std::filesystem::path& path);
[[nodiscard]] std::string format_series(const DailySeries& s);

/// Reads a JSON array of {station_id, file, lon, lat, name}.
[[nodiscard]] std::vector<StationInfo> load_manifest(const std::filesystem::path& path);
[[nodiscard]] const StationInfo& find_station(const std::vector<StationInfo>& stations,
                                              std::string_view id);

[[nodiscard]] DailySeries seasonal_filter(const DailySeries& s, const Season& season);

/// Strict exceedances value > u, in date order. `season` only labels the table.
[[nodiscard]] ExceedanceTable extract_exceedances(const DailySeries& s, double u,
                                                  const Season& season = {});

/// Joins two series on date. Throws DomainError unless both thresholds are
/// positive.
[[nodiscard]] PairedExceedanceTable paired_exceedances(const DailySeries& a, const DailySeries& b,
                                                       double u1, double u2);

/// Counts per calendar year from the first to the last year of the record.
[[nodiscard]] std::vector<YearCount> annual_frequency(const DailySeries& s, double u);

/// Counts per calendar month, January first.
[[nodiscard]] std::array<int, 12> monthly_frequency(const DailySeries& s, double u);

/// Calendar-year windows [start, start + window_years - 1], starting at the
/// first year of the record and advancing by step_years. Throws UsageError
/// when the record spans fewer than window_years calendar years.
[[nodiscard]] std::vector<SeriesWindow> windows(const DailySeries& s, const WindowPlan& plan,
                                                double u, const Season& season = {});

/// Restriction of a series to the calendar years [first, last].
[[nodiscard]] DailySeries year_range(const DailySeries& s, int first, int last);

[[nodiscard]] std::string format_date(const Date& d);
/// Parses YYYY-MM-DD; throws DomainError on malformed or invalid dates.
[[nodiscard]] Date parse_date(std::string_view text);

}  // namespace potwb
