#include "potwb/timeseries.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "potwb/errors.hpp"
#include "test_util.hpp"

namespace potwb {
namespace {

using namespace std::chrono;

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("potwb_ts_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

DailySeries noisy_series(int y0, int y1, std::uint64_t seed) {
  RandomStream rng(seed);
  return testing::daily_series(y0, y1, [&](const Date&) {
    return rng.uniform() < 0.6 ? 0.0 : std::round(80.0 * -std::log(rng.uniform())) / 10.0;
  });
}

TEST(LoadSeries, ThreeLinesWithOneMissing) {
  const auto s = parse_series("date,value\n2001-01-01,0.5\n2001-01-02,-9999\n2001-01-03,12\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.missing_count(), 1u);
  EXPECT_TRUE(DailySeries::is_missing(s.values[1]));
  EXPECT_EQ(s.values[2], 12.0);
}

TEST(LoadSeries, DuplicateDateIsFormatError) {
  EXPECT_THROW((void)parse_series("date,value\n2001-01-01,1\n2001-01-01,2\n"), FormatError);
  EXPECT_THROW((void)parse_series("date,value\n2001-01-02,1\n2001-01-01,2\n"), FormatError);
}

TEST(LoadSeries, MalformedRowsReportLine) {
  try {
    (void)parse_series("date,value\n2001-01-01,1\n2001-13-02,2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW((void)parse_series("date,value\n2001-01-01,abc\n"), ParseError);
  EXPECT_THROW((void)parse_series("date,value\n2001-01-01,-3\n"), ParseError);
  EXPECT_THROW((void)parse_series("when,amount\n"), ParseError);
  EXPECT_THROW((void)parse_series(""), ParseError);
  EXPECT_THROW((void)load_series("/nonexistent/series.csv"), DataError);
}

TEST(LoadSeries, LeapDaysRetained) {
  const auto s = parse_series("date,value\n2000-02-28,1\n2000-02-29,2\n2000-03-01,3\n");
  EXPECT_EQ(s.dates[1], Date{year(2000) / February / 29});
}

TEST(WriteSeries, RoundTrip) {
  auto s = noisy_series(1990, 1992, 1);
  s.values[10] = std::nan("");
  s.values[400] = 0.1 + 0.2;
  const auto dir = scratch_dir("roundtrip");
  write_series(s, dir / "st.csv");
  const auto back = load_series(dir / "st.csv");
  EXPECT_EQ(back.station_id, "st");
  ASSERT_EQ(back.size(), s.size());
  EXPECT_EQ(back.dates, s.dates);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (DailySeries::is_missing(s.values[i])) {
      EXPECT_TRUE(DailySeries::is_missing(back.values[i]));
    } else {
      EXPECT_EQ(back.values[i], s.values[i]);
    }
  }
}

TEST(SeasonalFilter, CalendarDayCounts) {
  const auto s = testing::daily_series(2001, 2001, [](const Date&) { return 1.0; });
  EXPECT_EQ(seasonal_filter(s, Season::parse("JJA")).size(), 92u);
  EXPECT_EQ(seasonal_filter(s, Season::parse("DJF")).size(), 90u);
  EXPECT_EQ(seasonal_filter(s, Season::parse("2")).size(), 28u);
  const auto leap = testing::daily_series(2004, 2004, [](const Date&) { return 1.0; });
  EXPECT_EQ(seasonal_filter(leap, Season::parse("DJF")).size(), 91u);
  const auto all = seasonal_filter(s, Season::parse("all"));
  EXPECT_EQ(all.dates, s.dates);
  EXPECT_EQ(all.values, s.values);
  EXPECT_THROW((void)Season::parse("MAM"), UsageError);
  EXPECT_THROW((void)Season::parse("13"), UsageError);
}

TEST(ExtractExceedances, StrictExceedance) {
  const auto s = parse_series("date,value\n2001-01-01,5\n2001-01-02,12\n2001-01-03,10\n2001-01-04,30\n");
  const auto t = extract_exceedances(s, 10.0);
  EXPECT_EQ(t.excess_values(), (std::vector<double>{2.0, 20.0}));
  EXPECT_EQ(t.excesses[1].date, Date{year(2001) / January / 4});
  EXPECT_EQ(extract_exceedances(DailySeries{}, 10.0).count(), 0u);
  EXPECT_THROW((void)extract_exceedances(s, 0.0), DomainError);
}

TEST(ExtractExceedances, RecordYearsCountPresentDays) {
  auto s = testing::daily_series(1961, 1990, [](const Date&) { return 1.0; });
  const auto jja = extract_exceedances(seasonal_filter(s, Season::parse("JJA")), 10.0);
  EXPECT_EQ(jja.record_years, 30.0 * 92.0 / 365.25);
  s.values[0] = std::nan("");
  s.values[1] = std::nan("");
  EXPECT_EQ(extract_exceedances(s, 10.0).record_years, (s.size() - 2.0) / 365.25);
}

TEST(ExtractExceedances, CommutesWithSeasonalFilter) {
  const auto s = noisy_series(1980, 1989, 2);
  for (const char* name : {"DJF", "JJA", "7"}) {
    const auto season = Season::parse(name);
    const auto filtered_first = extract_exceedances(seasonal_filter(s, season), 10.0);
    std::vector<Date> restricted;
    for (const auto& e : extract_exceedances(s, 10.0).excesses) {
      if (season.contains(static_cast<unsigned>(e.date.month()))) restricted.push_back(e.date);
    }
    std::vector<Date> got;
    for (const auto& e : filtered_first.excesses) got.push_back(e.date);
    EXPECT_EQ(got, restricted) << name;
  }
}

TEST(MonthlyFrequency, TwelveDisjointBins) {
  const auto s = noisy_series(1970, 1979, 3);
  const auto months = monthly_frequency(s, 10.0);
  EXPECT_EQ(months.size(), 12u);
  EXPECT_EQ(std::accumulate(months.begin(), months.end(), 0),
            static_cast<int>(extract_exceedances(s, 10.0).count()));
  for (unsigned m = 1; m <= 12; ++m) {
    EXPECT_EQ(months[m - 1], static_cast<int>(extract_exceedances(
                                 seasonal_filter(s, Season::parse(std::to_string(m))), 10.0)
                                                       .count()));
  }
}

TEST(AnnualFrequency, CountsSumAndFlags) {
  auto s = noisy_series(1950, 1959, 4);
  const auto years = annual_frequency(s, 10.0);
  ASSERT_EQ(years.size(), 10u);
  int total = 0;
  for (const auto& y : years) total += y.count;
  EXPECT_EQ(total, static_cast<int>(extract_exceedances(s, 10.0).count()));

  const auto dry = annual_frequency(testing::daily_series(1950, 1952, [](const Date&) { return 3.0; }), 10.0);
  for (const auto& y : dry) EXPECT_EQ(y.count, 0);

  // Knock out 1953 entirely and a quarter of 1955.
  const auto gap = year_range(s, 1950, 1952);
  auto tail = year_range(s, 1954, 1959);
  for (std::size_t i = 365; i < 365 + 92; ++i) tail.values[i] = std::nan("");
  DailySeries joined = gap;
  joined.dates.insert(joined.dates.end(), tail.dates.begin(), tail.dates.end());
  joined.values.insert(joined.values.end(), tail.values.begin(), tail.values.end());
  const auto with_gap = annual_frequency(joined, 10.0);
  ASSERT_EQ(with_gap.size(), 10u);
  EXPECT_EQ(with_gap[3].year, 1953);
  EXPECT_EQ(with_gap[3].count, 0);
  EXPECT_TRUE(with_gap[3].flagged);
  EXPECT_TRUE(with_gap[5].flagged);
  EXPECT_FALSE(with_gap[4].flagged);
}

TEST(Windows, SixtyThreeYearsGiveFortyFourWindows) {
  const auto s = noisy_series(1950, 2012, 5);
  const auto w = windows(s, {}, 10.0);
  ASSERT_EQ(w.size(), 44u);
  EXPECT_EQ(w.front().start_year, 1950);
  EXPECT_EQ(w.back().end_year, 2012);
  for (std::size_t i = 1; i < w.size(); ++i) {
    // Adjacent windows share 19 years.
    const int shared = w[i - 1].end_year - w[i].start_year + 1;
    EXPECT_EQ(shared, 19);
    std::set<sys_days> a, b;
    for (const auto& e : w[i - 1].table.excesses) a.insert(sys_days(e.date));
    for (const auto& e : w[i].table.excesses) b.insert(sys_days(e.date));
    for (const auto& d : b) {
      if (year_month_day(d).year() < year(w[i - 1].end_year + 1)) EXPECT_TRUE(a.count(d));
    }
  }
}

TEST(Windows, FlagsSparseWindowsAndRejectsShortSeries) {
  const auto s = testing::daily_series(1950, 1979, [](const Date& d) {
    return static_cast<unsigned>(d.day()) == 1 && static_cast<unsigned>(d.month()) <= 2 ? 15.0 : 0.0;
  });
  WindowPlan plan;
  const auto w = windows(s, plan, 10.0);
  ASSERT_EQ(w.size(), 11u);
  for (const auto& win : w) {
    EXPECT_EQ(win.table.count(), 40u);
    EXPECT_TRUE(win.insufficient);
  }
  plan.min_exceedances = 40;
  EXPECT_FALSE(windows(s, plan, 10.0).front().insufficient);
  plan.window_years = 31;
  EXPECT_THROW((void)windows(s, plan, 10.0), UsageError);
  plan.window_years = 20;
  plan.step_years = 5;
  EXPECT_EQ(windows(s, plan, 10.0).size(), 3u);
  plan.min_exceedances = 5;
  EXPECT_THROW((void)windows(s, plan, 10.0), UsageError);
}

TEST(Manifest, LoadsAndResolvesFiles) {
  const auto dir = scratch_dir("manifest");
  std::ofstream(dir / "stations.json")
      << R"([{"station_id":"A","file":"a.csv","lon":19.0,"lat":47.5,"name":"Alpha"},)"
      << R"( {"station_id":"B","file":"b.csv","lon":18.4,"lat":47.2}])";
  const auto st = load_manifest(dir / "stations.json");
  ASSERT_EQ(st.size(), 2u);
  EXPECT_EQ(st[0].file, dir / "a.csv");
  EXPECT_EQ(st[1].name, "B");
  EXPECT_EQ(find_station(st, "B").lat, 47.2);
  EXPECT_THROW((void)find_station(st, "C"), UsageError);
  std::ofstream(dir / "bad.json") << R"({"station_id":"A"})";
  EXPECT_THROW((void)load_manifest(dir / "bad.json"), FormatError);
}

TEST(PairedExceedances, JoinsOnDateAndKeepsOneSidedDays) {
  auto a = noisy_series(2000, 2003, 11);
  auto b = noisy_series(2001, 2004, 12);
  b.values[40] = std::nan("");
  const auto t = paired_exceedances(a, b, 10.0, 8.0);

  // Brute-force oracle over a date map.
  std::map<sys_days, double> bv;
  for (std::size_t j = 0; j < b.size(); ++j) bv[sys_days(b.dates[j])] = b.values[j];
  std::size_t common = 0;
  std::vector<std::array<double, 2>> expect;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto it = bv.find(sys_days(a.dates[i]));
    if (it == bv.end() || std::isnan(a.values[i]) || std::isnan(it->second)) continue;
    ++common;
    if (a.values[i] > 10.0 || it->second > 8.0) expect.push_back({a.values[i] - 10.0, it->second - 8.0});
  }
  EXPECT_EQ(t.points(), expect);
  EXPECT_DOUBLE_EQ(t.record_years, common / 365.25);
  for (const auto& p : t.pairs) EXPECT_TRUE(p.excess[0] > 0.0 || p.excess[1] > 0.0);
  EXPECT_THROW((void)paired_exceedances(a, b, 0.0, 8.0), DomainError);
}

}  // namespace
}  // namespace potwb
