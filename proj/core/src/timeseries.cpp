#include "potwb/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "potwb/errors.hpp"

namespace potwb {

namespace {

using namespace std::chrono;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

int days_in_year(int y) { return year(y).is_leap() ? 366 : 365; }

constexpr double kDaysPerYear = 365.25;

}  // namespace

bool DailySeries::is_missing(double v) { return std::isnan(v); }

std::size_t DailySeries::missing_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), is_missing));
}

int DailySeries::first_year() const {
  if (dates.empty()) throw UsageError("series is empty");
  return static_cast<int>(dates.front().year());
}

int DailySeries::last_year() const {
  if (dates.empty()) throw UsageError("series is empty");
  return static_cast<int>(dates.back().year());
}

Season Season::parse(std::string_view text) {
  Season s;
  if (text == "all") return s;
  if (text == "DJF" || text == "djf") {
    s.kind = Kind::djf;
    return s;
  }
  if (text == "JJA" || text == "jja") {
    s.kind = Kind::jja;
    return s;
  }
  int m = 0;
  if (parse_int(text, m) && m >= 1 && m <= 12) {
    s.kind = Kind::month;
    s.month = static_cast<unsigned>(m);
    return s;
  }
  throw UsageError("unknown season '" + std::string(text) + "' (all, DJF, JJA or 1..12)");
}

bool Season::contains(unsigned m) const {
  switch (kind) {
    case Kind::all:
      return true;
    case Kind::djf:
      return m == 12 || m == 1 || m == 2;
    case Kind::jja:
      return m >= 6 && m <= 8;
    case Kind::month:
      return m == month;
  }
  return false;
}

std::string Season::name() const {
  switch (kind) {
    case Kind::all:
      return "all";
    case Kind::djf:
      return "DJF";
    case Kind::jja:
      return "JJA";
    case Kind::month:
      return std::to_string(month);
  }
  return "all";
}

std::vector<double> ExceedanceTable::excess_values() const {
  std::vector<double> out;
  out.reserve(excesses.size());
  for (const auto& e : excesses) out.push_back(e.excess);
  return out;
}

void WindowPlan::validate() const {
  if (window_years < 1) throw UsageError("window length must be at least one year");
  if (step_years < 1) throw UsageError("window step must be at least one year");
  if (min_exceedances < 10) throw UsageError("minimum exceedances per window must be >= 10");
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

Date parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_int(text.substr(0, 4), y) ||
      !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
    throw DomainError("expected a YYYY-MM-DD date, got '" + std::string(text) + "'");
  }
  const Date date{year(y), month(static_cast<unsigned>(m)), day(static_cast<unsigned>(d))};
  if (!date.ok()) throw DomainError("invalid calendar date '" + std::string(text) + "'");
  return date;
}

DailySeries parse_series(std::string_view csv, std::string station_id) {
  DailySeries s;
  s.station_id = std::move(station_id);
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    const auto line = trim(csv.substr(0, nl));
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError("expected two comma-separated fields", line_no);
    }
    const auto f_date = trim(line.substr(0, comma));
    const auto f_value = trim(line.substr(comma + 1));
    if (!header_seen) {
      if (f_date != "date" || f_value != "value") {
        throw ParseError("expected header 'date,value'", line_no);
      }
      header_seen = true;
      continue;
    }
    Date date;
    try {
      date = parse_date(f_date);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line_no);
    }
    double value = 0.0;
    const auto* end = f_value.data() + f_value.size();
    const auto [ptr, ec] = std::from_chars(f_value.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
      throw ParseError("malformed value '" + std::string(f_value) + "'", line_no);
    }
    if (value == kMissingSentinel) {
      value = std::numeric_limits<double>::quiet_NaN();
    } else if (value < 0.0) {
      throw ParseError("negative precipitation value", line_no);
    }
    if (!s.dates.empty() && !(sys_days(date) > sys_days(s.dates.back()))) {
      throw FormatError("dates must be strictly increasing (line " + std::to_string(line_no) +
                        ", " + format_date(date) + ")");
    }
    s.dates.push_back(date);
    s.values.push_back(value);
  }
  if (!header_seen) throw ParseError("missing header 'date,value'", 1);
  return s;
}

DailySeries load_series(const std::filesystem::path& path, std::string station_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open series file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (station_id.empty()) station_id = path.stem().string();
  return parse_series(buf.str(), std::move(station_id));
}

std::string format_series(const DailySeries& s) {
  std::string out = "date,value\n";
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += format_date(s.dates[i]);
    out += ',';
    const double v = DailySeries::is_missing(s.values[i]) ? kMissingSentinel : s.values[i];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
    out += '\n';
  }
  return out;
}

void write_series(const DailySeries& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write series file " + path.string());
  out << format_series(s);
}

std::vector<StationInfo> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_array()) throw FormatError("manifest must be a JSON array");
  std::vector<StationInfo> out;
  for (const auto& entry : doc) {
    try {
      StationInfo st;
      st.station_id = entry.at("station_id").get<std::string>();
      st.file = path.parent_path() / entry.at("file").get<std::string>();
      st.lon = entry.at("lon").get<double>();
      st.lat = entry.at("lat").get<double>();
      st.name = entry.value("name", st.station_id);
      out.push_back(std::move(st));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad manifest entry: ") + e.what());
    }
  }
  return out;
}

const StationInfo& find_station(const std::vector<StationInfo>& stations, std::string_view id) {
  for (const auto& st : stations) {
    if (st.station_id == id) return st;
  }
  throw UsageError("station '" + std::string(id) + "' is not in the manifest");
}

DailySeries seasonal_filter(const DailySeries& s, const Season& season) {
  DailySeries out;
  out.station_id = s.station_id;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (season.contains(static_cast<unsigned>(s.dates[i].month()))) {
      out.dates.push_back(s.dates[i]);
      out.values.push_back(s.values[i]);
    }
  }
  return out;
}

ExceedanceTable extract_exceedances(const DailySeries& s, double u, const Season& season) {
  if (!(u > 0.0)) throw DomainError("threshold must be positive");
  ExceedanceTable t;
  t.threshold = u;
  t.season = season;
  std::size_t present = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s.values[i];
    if (DailySeries::is_missing(v)) continue;
    ++present;
    if (v > u) t.excesses.push_back({s.dates[i], v - u});
  }
  t.record_years = static_cast<double>(present) / kDaysPerYear;
  return t;
}

std::vector<std::array<double, 2>> PairedExceedanceTable::points() const {
  std::vector<std::array<double, 2>> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.excess);
  return out;
}

PairedExceedanceTable paired_exceedances(const DailySeries& a, const DailySeries& b, double u1,
                                         double u2) {
  if (!(u1 > 0.0) || !(u2 > 0.0)) throw DomainError("thresholds must be positive");
  PairedExceedanceTable t;
  t.threshold = {u1, u2};
  std::size_t common = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const auto da = sys_days(a.dates[i]);
    const auto db = sys_days(b.dates[j]);
    if (da < db) {
      ++i;
      continue;
    }
    if (db < da) {
      ++j;
      continue;
    }
    const double va = a.values[i];
    const double vb = b.values[j];
    if (!DailySeries::is_missing(va) && !DailySeries::is_missing(vb)) {
      ++common;
      if (va > u1 || vb > u2) t.pairs.push_back({a.dates[i], {va - u1, vb - u2}});
    }
    ++i;
    ++j;
  }
  t.record_years = static_cast<double>(common) / kDaysPerYear;
  return t;
}

std::vector<YearCount> annual_frequency(const DailySeries& s, double u) {
  if (!(u > 0.0)) throw DomainError("threshold must be positive");
  std::vector<YearCount> out;
  if (s.dates.empty()) return out;
  const int y0 = s.first_year();
  const int y1 = s.last_year();
  std::vector<int> present(static_cast<std::size_t>(y1 - y0 + 1), 0);
  for (int y = y0; y <= y1; ++y) out.push_back({y, 0, 0.0, false});
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto k = static_cast<std::size_t>(static_cast<int>(s.dates[i].year()) - y0);
    if (DailySeries::is_missing(s.values[i])) continue;
    ++present[k];
    if (s.values[i] > u) ++out[k].count;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const int days = days_in_year(out[k].year);
    out[k].missing_fraction = static_cast<double>(days - present[k]) / days;
    out[k].flagged = out[k].missing_fraction > 0.2;
  }
  return out;
}

std::array<int, 12> monthly_frequency(const DailySeries& s, double u) {
  if (!(u > 0.0)) throw DomainError("threshold must be positive");
  std::array<int, 12> counts{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!DailySeries::is_missing(s.values[i]) && s.values[i] > u) {
      ++counts[static_cast<unsigned>(s.dates[i].month()) - 1];
    }
  }
  return counts;
}

DailySeries year_range(const DailySeries& s, int first, int last) {
  DailySeries out;
  out.station_id = s.station_id;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int y = static_cast<int>(s.dates[i].year());
    if (y >= first && y <= last) {
      out.dates.push_back(s.dates[i]);
      out.values.push_back(s.values[i]);
    }
  }
  return out;
}

std::vector<SeriesWindow> windows(const DailySeries& s, const WindowPlan& plan, double u,
                                  const Season& season) {
  plan.validate();
  if (s.dates.empty()) throw UsageError("series is empty");
  const int y0 = s.first_year();
  const int y1 = s.last_year();
  if (y1 - y0 + 1 < plan.window_years) {
    throw UsageError("series spans " + std::to_string(y1 - y0 + 1) + " years, fewer than the " +
                     std::to_string(plan.window_years) + "-year window");
  }
  const auto filtered = seasonal_filter(s, season);
  std::vector<SeriesWindow> out;
  for (int start = y0; start + plan.window_years - 1 <= y1; start += plan.step_years) {
    SeriesWindow w;
    w.start_year = start;
    w.end_year = start + plan.window_years - 1;
    w.table = extract_exceedances(year_range(filtered, w.start_year, w.end_year), u, season);
    w.insufficient = static_cast<int>(w.table.count()) < plan.min_exceedances;
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace potwb
