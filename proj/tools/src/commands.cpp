#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cli.hpp"
#include "csv.hpp"
#include "potwb/bgpd.hpp"
#include "potwb/bootstrap.hpp"
#include "potwb/errors.hpp"
#include "potwb/fitter.hpp"
#include "potwb/parallel.hpp"
#include "potwb/profile.hpp"
#include "potwb/simstudy.hpp"
#include "potwb/timeseries.hpp"
#include "svg.hpp"

namespace potwb::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kRed = "#c0392b";
constexpr const char* kBlue = "#2060b0";
constexpr const char* kGrey = "#888888";
constexpr std::size_t kMaxRegionCells = 800;

DailySeries load_station(const RunConfig& cfg, const std::string& id) {
  const auto stations = load_manifest(cfg.manifest);
  const auto& st = find_station(stations, id);
  return load_series(st.file, st.station_id);
}

double threshold_b(const RunConfig& cfg) { return cfg.threshold_b > 0.0 ? cfg.threshold_b : cfg.threshold; }

std::string m_tag(double m) { return fmt::format("m{:g}", m); }

OptimizerConfig optimizer() { return OptimizerConfig{}; }

BootstrapOptions boot_options(const RunConfig& cfg) {
  BootstrapOptions o;
  o.threads = cfg.threads;
  return o;
}

WeightScheme scheme_of(const RunConfig& cfg) {
  return parse_weight_kind(cfg.scheme) == WeightKind::multinomial ? WeightScheme::multinomial()
                                                                   : WeightScheme::exponential();
}

std::string scheme_name(const RunConfig& cfg) {
  return std::string("boot-") + std::string(to_string(scheme_of(cfg).kind)).substr(0, 3);
}

CsvTable fit_table(const RunConfig& cfg, const ExceedanceTable& t, const FitResult& fit) {
  CsvTable csv({"station", "season", "threshold", "n_exceed", "record_years", "sigma", "xi", "loglik",
                "converged"});
  csv.add_row({cfg.station, cfg.season, num(cfg.threshold), integer(static_cast<long long>(t.count())),
               num(t.record_years), num(fit.params.sigma()), num(fit.params.xi()),
               num(fit.loglik_at_max), fit.converged ? "true" : "false"});
  return csv;
}

// --- fit -------------------------------------------------------------------

RunResult cmd_fit(const RunConfig& cfg) {
  const auto series = seasonal_filter(load_station(cfg, cfg.station), Season::parse(cfg.season));
  const auto t = extract_exceedances(series, cfg.threshold, Season::parse(cfg.season));
  const auto x = t.excess_values();
  const auto fit = fit_gpd(x, optimizer());

  RunResult r;
  const auto summary = fit_table(cfg, t, fit);

  CsvTable levels({"q", "excess_quantile", "return_level"});
  for (double q : cfg.q_levels) {
    const double z = gpd_quantile(fit.params, q);
    levels.add_row({num(q), num(z), num(cfg.threshold + z)});
  }

  CsvTable qq({"i", "plotting_position", "theoretical", "observed"});
  const auto pairs = qq_pairs(fit.params, x);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    qq.add_row({integer(static_cast<long long>(i + 1)),
                num((static_cast<double>(i) + 0.5) / static_cast<double>(pairs.size())),
                num(pairs[i].first), num(pairs[i].second)});
  }

  Figure fig;
  fig.title = fmt::format("GPD QQ plot, {} ({}), u = {:g}", cfg.station, cfg.season, cfg.threshold);
  fig.panel_height = 420.0;
  Panel p;
  p.x_label = "fitted quantile";
  p.y_label = "observed excess";
  const auto th = qq.numbers("theoretical");
  const auto ob = qq.numbers("observed");
  double hi = 0.0;
  for (std::size_t i = 0; i < th.size(); ++i) hi = std::max({hi, th[i], ob[i]});
  p.series.push_back({{0.0, hi}, {0.0, hi}, Series::Style::dashed, kGrey, "identity"});
  p.series.push_back({th, ob, Series::Style::hollow_points, kBlue, "excesses"});
  fig.panels.push_back(p);

  r.summary = fmt::format("fit {}: n={} sigma={:.6g} xi={:.6g}\n", cfg.station, t.count(),
                          fit.params.sigma(), fit.params.xi());
  r.artifacts = {{"fit.csv", summary.str()},
                 {"fit_levels.csv", levels.str()},
                 {"qq.csv", qq.str()},
                 {"qq.svg", fig.render()}};
  return r;
}

// --- returnlevel -------------------------------------------------------------

RunResult cmd_returnlevel(const RunConfig& cfg) {
  const auto season = Season::parse(cfg.season);
  const auto series = seasonal_filter(load_station(cfg, cfg.station), season);
  const auto t = extract_exceedances(series, cfg.threshold, season);
  const auto x = t.excess_values();
  const auto ocfg = optimizer();
  const auto fit = fit_gpd(x, ocfg);
  const auto conf = ConfidenceSpec::from_level(cfg.conf);
  const bool boot = cfg.replicates > 0;

  std::vector<std::string> header{"m", "q", "return_level", "profile_lower", "profile_upper"};
  if (boot) {
    for (const char* h : {"boot_lower", "boot_upper", "boot_failures"}) header.emplace_back(h);
  }
  header.emplace_back("status");
  CsvTable levels(header);
  const double u = cfg.threshold;
  for (double m : cfg.return_periods) {
    std::vector<std::string> row{num(m)};
    double q = 0.0;
    try {
      q = quantile_level({m, t.record_years, t.count()});
    } catch (const DomainError&) {
      row.resize(header.size());
      row.back() = "error: return period below the mean spacing of exceedances";
      levels.add_row(row);
      continue;
    }
    const auto iv = profile_interval(x, q, conf, ocfg);
    row.insert(row.end(), {num(q), num(u + gpd_quantile(fit.params, q)), num(u + iv.lower), num(u + iv.upper)});
    if (boot) {
      const auto b = boot_interval(x, q, scheme_of(cfg), conf, cfg.replicates, cfg.seed, ocfg,
                                   boot_options(cfg));
      row.insert(row.end(), {num(u + b.lower_mean), num(u + b.upper_mean), integer(b.failures)});
    }
    row.emplace_back("ok");
    levels.add_row(row);
  }

  // Empirical return periods at the plotting positions used by the QQ plot.
  auto sorted = x;
  std::sort(sorted.begin(), sorted.end());
  CsvTable obs({"rank", "value", "return_period"});
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    obs.add_row({integer(static_cast<long long>(i + 1)), num(u + sorted[i]),
                 num(t.record_years / (n * (1.0 - p)))});
  }

  Figure fig;
  fig.title = fmt::format("Return levels, {} ({}), {:g}% bounds", cfg.station, cfg.season, 100.0 * cfg.conf);
  fig.panel_height = 420.0;
  Panel p;
  p.log_x = true;
  p.x_label = "return period (years)";
  p.y_label = "return level";
  const auto ms = levels.numbers("m");
  p.series.push_back({obs.numbers("return_period"), obs.numbers("value"), Series::Style::hollow_points,
                      kGrey, "observations"});
  p.series.push_back({ms, levels.numbers("return_level"), Series::Style::line, "#000000", "estimate"});
  p.series.push_back({ms, levels.numbers("profile_lower"), Series::Style::dashed, kRed, "profile"});
  p.series.push_back({ms, levels.numbers("profile_upper"), Series::Style::dashed, kRed, ""});
  if (boot) {
    p.series.push_back({ms, levels.numbers("boot_lower"), Series::Style::line, kBlue, scheme_name(cfg)});
    p.series.push_back({ms, levels.numbers("boot_upper"), Series::Style::line, kBlue, ""});
  }
  fig.panels.push_back(p);

  RunResult r;
  r.summary = fmt::format("returnlevel {}: n={} record_years={:.4g}\n", cfg.station, t.count(), t.record_years);
  r.artifacts = {{"fit.csv", fit_table(cfg, t, fit).str()},
                 {"return_levels.csv", levels.str()},
                 {"observations.csv", obs.str()},
                 {"return_levels.svg", fig.render()}};
  return r;
}

// --- window ------------------------------------------------------------------

RunResult cmd_window(const RunConfig& cfg) {
  const auto season = Season::parse(cfg.season);
  const auto series = load_station(cfg, cfg.station);
  const WindowPlan plan{cfg.window_years, cfg.step, cfg.min_exceed};
  const auto wins = windows(series, plan, cfg.threshold, season);
  const auto ocfg = optimizer();
  const auto conf = ConfidenceSpec::from_level(cfg.conf);
  const bool boot = cfg.replicates > 0;
  const double u = cfg.threshold;

  std::vector<std::string> header{"window_start", "window_end", "n_exceed", "sigma", "xi"};
  for (double m : cfg.return_periods) {
    header.push_back("rl_" + m_tag(m));
    header.push_back("lower_" + m_tag(m));
    header.push_back("upper_" + m_tag(m));
  }
  header.emplace_back("ci_method");
  header.emplace_back("flag");

  std::vector<std::vector<std::string>> rows(wins.size());
  // Windows are independent; inner bootstraps run single-threaded so the
  // output does not depend on the worker count.
  BootstrapOptions inner;
  inner.threads = 1;
  parallel_for(wins.size(), cfg.threads, [&](std::size_t k) {
    const auto& w = wins[k];
    auto& row = rows[k];
    row = {integer(w.start_year), integer(w.end_year), integer(static_cast<long long>(w.table.count()))};
    const auto pad = [&](const std::string& flag) {
      row.resize(header.size());
      row[header.size() - 2] = boot ? scheme_name(cfg) : "profile";
      row.back() = flag;
    };
    if (w.insufficient) return pad("insufficient");
    const auto x = w.table.excess_values();
    FitResult fit;
    try {
      fit = fit_gpd(x, ocfg);
    } catch (const DataError&) {
      return pad("fit_failed");
    }
    row.push_back(num(fit.params.sigma()));
    row.push_back(num(fit.params.xi()));
    bool interval_failed = false;
    for (double m : cfg.return_periods) {
      double q = 0.0;
      try {
        q = quantile_level({m, w.table.record_years, w.table.count()});
      } catch (const DomainError&) {
        row.insert(row.end(), {"", "", ""});
        interval_failed = true;
        continue;
      }
      row.push_back(num(u + gpd_quantile(fit.params, q)));
      try {
        if (boot) {
          const auto b = boot_interval(x, q, scheme_of(cfg), conf, cfg.replicates,
                                       RandomStream::derive(cfg.seed, k)(), ocfg, inner);
          row.insert(row.end(), {num(u + b.lower_mean), num(u + b.upper_mean)});
        } else {
          const auto iv = profile_interval(x, q, conf, ocfg);
          row.insert(row.end(), {num(u + iv.lower), num(u + iv.upper)});
        }
      } catch (const NumericalError&) {
        row.insert(row.end(), {"", ""});
        interval_failed = true;
      }
    }
    row.emplace_back(boot ? scheme_name(cfg) : "profile");
    row.emplace_back(interval_failed ? "interval_failed" : "ok");
  });
  CsvTable csv(header);
  for (auto& row : rows) csv.add_row(std::move(row));

  Figure fig;
  fig.title = fmt::format("{}-year windows, {} ({}), {:g}% bounds", cfg.window_years, cfg.station,
                          cfg.season, 100.0 * cfg.conf);
  fig.panel_height = 260.0;
  const auto starts = csv.numbers("window_start");
  fig.panels.push_back({"scale", "window start", "sigma", false, {},
                        {{starts, csv.numbers("sigma"), Series::Style::line, "#000000", ""}}});
  fig.panels.push_back({"shape", "window start", "xi", false, {},
                        {{starts, csv.numbers("xi"), Series::Style::line, "#000000", ""}}});
  for (double m : cfg.return_periods) {
    Panel p{fmt::format("{:g}-year return level", m), "window start", "return level", false, {}, {}};
    p.series.push_back({starts, csv.numbers("rl_" + m_tag(m)), Series::Style::line, "#000000", "estimate"});
    p.series.push_back({starts, csv.numbers("upper_" + m_tag(m)), Series::Style::line, kBlue, "upper"});
    p.series.push_back({starts, csv.numbers("lower_" + m_tag(m)), Series::Style::line, kRed, "lower"});
    fig.panels.push_back(p);
  }

  RunResult r;
  r.summary = fmt::format("window {}: {} windows\n", cfg.station, wins.size());
  r.artifacts = {{"windows.csv", csv.str()}, {"windows.svg", fig.render()}};
  return r;
}

// --- bgpd ------------------------------------------------------------------

struct PairData {
  DailySeries a;
  DailySeries b;
};

PairData load_pair(const RunConfig& cfg) {
  const auto season = Season::parse(cfg.season);
  return {seasonal_filter(load_station(cfg, cfg.station), season),
          seasonal_filter(load_station(cfg, cfg.station_b), season)};
}

PairedExceedanceTable pairs_in(const RunConfig& cfg, const PairData& d, const YearSpan* span) {
  if (span == nullptr) return paired_exceedances(d.a, d.b, cfg.threshold, threshold_b(cfg));
  return paired_exceedances(year_range(d.a, span->first, span->last),
                            year_range(d.b, span->first, span->last), cfg.threshold, threshold_b(cfg));
}

void check_span_in_record(const YearSpan& s, const PairData& d) {
  if (d.a.dates.empty() || d.b.dates.empty()) throw DataError("station series is empty");
  const int first = std::max(d.a.first_year(), d.b.first_year());
  const int last = std::min(d.a.last_year(), d.b.last_year());
  if (s.first < first || s.last > last) {
    throw UsageError(fmt::format("window {} lies outside the common record {}-{}", s.name(), first, last));
  }
}

std::string bool_cell(bool b) { return b ? "true" : "false"; }

RunResult cmd_bgpd(const RunConfig& cfg) {
  const auto data = load_pair(cfg);
  const auto ocfg = optimizer();
  std::vector<YearSpan> spans;
  if (!cfg.window1.empty()) spans.push_back(YearSpan::parse(cfg.window1));
  if (!cfg.window2.empty()) spans.push_back(YearSpan::parse(cfg.window2));
  for (const auto& s : spans) check_span_in_record(s, data);

  const auto all = pairs_in(cfg, data, nullptr);
  const auto pts = all.points();
  const auto fit = fit_bgpd(pts, ocfg);

  CsvTable csv({"station_a", "station_b", "threshold_a", "threshold_b", "n_pairs", "dep", "dep_lower5",
                "dep_mean", "dep_upper95", "boot_replicates", "boot_failures", "dep_at_bound", "converged",
                "loglik", "sigma1", "xi1", "mu2", "sigma2", "xi2", "joint_q", "joint_prob"});
  double lo = kNaN, mean = kNaN, hi = kNaN;
  int failures = 0;
  if (cfg.replicates > 0) {
    const auto b = bootstrap_dependence(pts, scheme_of(cfg), cfg.replicates, cfg.seed, ocfg, boot_options(cfg));
    lo = b.lower5;
    mean = b.mean;
    hi = b.upper95;
    failures = b.failures;
  }
  const auto& m = fit.model;
  csv.add_row({cfg.station, cfg.station_b, num(cfg.threshold), num(threshold_b(cfg)),
               integer(static_cast<long long>(fit.n_used)), num(m.dep), num(lo), num(mean), num(hi),
               integer(std::max(cfg.replicates, 0)), integer(failures), bool_cell(fit.dep_at_bound),
               bool_cell(fit.converged), num(fit.loglik), num(m.marg1.sigma), num(m.marg1.xi),
               num(m.marg2.mu), num(m.marg2.sigma), num(m.marg2.xi), num(cfg.joint_q),
               num(joint_exceedance_prob(m, cfg.joint_q))});

  RunResult r;
  r.summary = fmt::format("bgpd {}-{}: pairs={} dep={:.4g}{}\n", cfg.station, cfg.station_b, fit.n_used, m.dep,
                          fit.dep_at_bound ? " (at search bound)" : "");
  r.artifacts.push_back({"bgpd.csv", csv.str()});

  if (!spans.empty()) {
    CsvTable cmp({"window", "first_year", "last_year", "n_pairs", "dep", "dep_at_bound", "converged",
                  "joint_prob", "ratio_to_first"});
    double p_first = kNaN;
    for (const auto& s : spans) {
      const auto wp = pairs_in(cfg, data, &s).points();
      const auto wf = fit_bgpd(wp, ocfg);
      const double p = joint_exceedance_prob(wf.model, cfg.joint_q);
      if (std::isnan(p_first)) p_first = p;
      cmp.add_row({s.name(), integer(s.first), integer(s.last), integer(static_cast<long long>(wf.n_used)),
                   num(wf.model.dep), bool_cell(wf.dep_at_bound), bool_cell(wf.converged), num(p),
                   num(p / p_first)});
    }
    r.artifacts.push_back({"bgpd_windows_compare.csv", cmp.str()});
  }

  if (cfg.trajectory) {
    if (data.a.dates.empty() || data.b.dates.empty()) throw DataError("station series is empty");
    const int first = std::max(data.a.first_year(), data.b.first_year());
    const int last = std::min(data.a.last_year(), data.b.last_year());
    if (last - first + 1 < cfg.window_years) {
      throw UsageError(fmt::format("common record {}-{} is shorter than the {}-year window", first, last,
                                   cfg.window_years));
    }
    std::vector<YearSpan> wins;
    for (int y = first; y + cfg.window_years - 1 <= last; y += cfg.step) wins.push_back({y, y + cfg.window_years - 1});
    const std::size_t min_pairs = std::max<std::size_t>(kMinBgpdFitSize, static_cast<std::size_t>(cfg.min_exceed));
    std::vector<std::vector<std::string>> rows(wins.size());
    parallel_for(wins.size(), cfg.threads, [&](std::size_t k) {
      const auto wp = pairs_in(cfg, data, &wins[k]).points();
      auto& row = rows[k];
      row = {integer(wins[k].first), integer(wins[k].last), integer(static_cast<long long>(wp.size()))};
      if (wp.size() < min_pairs) {
        row.insert(row.end(), {"", "", "insufficient"});
        return;
      }
      const auto wf = fit_bgpd(wp, ocfg);
      row.insert(row.end(), {num(wf.model.dep), num(joint_exceedance_prob(wf.model, cfg.joint_q)),
                             wf.dep_at_bound ? "dep_at_bound" : (wf.converged ? "ok" : "not_converged")});
    });
    CsvTable traj({"window_start", "window_end", "n_pairs", "dep", "joint_prob", "flag"});
    for (auto& row : rows) traj.add_row(std::move(row));

    Figure fig;
    fig.title = fmt::format("Dependence over {}-year windows, {}-{}", cfg.window_years, cfg.station, cfg.station_b);
    fig.panels.push_back({"logistic dependence", "window start", "dep", false, {},
                          {{traj.numbers("window_start"), traj.numbers("dep"), Series::Style::line, "#000000", ""}}});
    r.artifacts.push_back({"bgpd_trajectory.csv", traj.str()});
    r.artifacts.push_back({"bgpd_trajectory.svg", fig.render()});
  }
  return r;
}

// --- region ------------------------------------------------------------------

RunResult cmd_region(const RunConfig& cfg) {
  const auto data = load_pair(cfg);
  const auto ocfg = optimizer();
  const YearSpan spans[2] = {YearSpan::parse(cfg.window1), YearSpan::parse(cfg.window2)};
  for (const auto& s : spans) check_span_in_record(s, data);

  struct WindowFit {
    PairedExceedanceTable table;
    BgpdFitResult fit;
    double rate = 0.0;
    double target = 0.0;
  };
  WindowFit wf[2];
  for (int k = 0; k < 2; ++k) {
    wf[k].table = pairs_in(cfg, data, &spans[k]);
    wf[k].fit = fit_bgpd(wf[k].table.points(), ocfg);
    if (!(wf[k].table.record_years > 0.0)) throw DataError("window " + spans[k].name() + " has no common days");
    wf[k].rate = static_cast<double>(wf[k].table.count()) / wf[k].table.record_years;
    wf[k].target = region_target_mass(wf[k].rate, cfg.return_years);
  }

  // One grid for both windows so the regions are drawn on the same cells.
  // Cell-centre densities miss mass near the axes on coarse grids, so the
  // grid is refined until both targets are reachable.
  const auto g0 = default_grid(wf[0].fit.model);
  const auto g1 = default_grid(wf[1].fit.model);
  GridSpec grid;
  std::vector<CoverageRegion> regions;
  for (std::size_t count = g0.count[0];; count *= 2) {
    for (int c = 0; c < 2; ++c) {
      const double lo = std::min(g0.origin[c], g1.origin[c]);
      const double hi =
          std::max(g0.origin[c] + g0.step[c] * g0.count[c], g1.origin[c] + g1.step[c] * g1.count[c]);
      grid.origin[c] = lo;
      grid.count[c] = count;
      grid.step[c] = (hi - lo) / static_cast<double>(count);
    }
    try {
      regions.clear();
      for (int k = 0; k < 2; ++k) regions.push_back(coverage_region(wf[k].fit.model, wf[k].target, grid));
      break;
    } catch (const GridInsufficientError&) {
      if (count >= kMaxRegionCells) throw;
    }
  }

  CsvTable summary({"window", "first_year", "last_year", "n_pairs", "record_years", "pairs_per_year",
                    "return_years", "target_mass", "achieved_mass", "area", "density_cut", "dep", "cell_dx",
                    "cell_dy"});
  CsvTable cells({"window", "cell_i", "cell_j", "x1", "x2", "density"});
  for (int k = 0; k < 2; ++k) {
    const auto& region = regions[static_cast<std::size_t>(k)];
    summary.add_row({spans[k].name(), integer(spans[k].first), integer(spans[k].last),
                     integer(static_cast<long long>(wf[k].table.count())), num(wf[k].table.record_years),
                     num(wf[k].rate), num(cfg.return_years), num(wf[k].target), num(region.achieved_mass),
                     num(region.area()), num(region.density_cut), num(wf[k].fit.model.dep), num(grid.step[0]),
                     num(grid.step[1])});
    for (const auto flat : region.member_cells) {
      const std::size_t i = flat / grid.count[1];
      const std::size_t j = flat % grid.count[1];
      const auto c = grid.centre(i, j);
      cells.add_row({spans[k].name(), integer(static_cast<long long>(i)), integer(static_cast<long long>(j)),
                     num(c[0]), num(c[1]), num(region.cell_density[flat])});
    }
  }

  CsvTable obs({"date", "x1", "x2", "period"});
  for (const auto& p : pairs_in(cfg, data, nullptr).pairs) {
    const int y = static_cast<int>(p.date.year());
    std::string period = "other";
    if (y >= spans[0].first && y <= spans[0].last) {
      period = spans[0].name();
    } else if (y >= spans[1].first && y <= spans[1].last) {
      period = spans[1].name();
    }
    obs.add_row({format_date(p.date), num(p.excess[0]), num(p.excess[1]), period});
  }

  Figure fig;
  fig.title = fmt::format("{:g}-year coverage regions, {}-{}", cfg.return_years, cfg.station, cfg.station_b);
  fig.width = 640.0;
  fig.panel_height = 600.0;
  Panel p{"", fmt::format("{} excess", cfg.station), fmt::format("{} excess", cfg.station_b), false, {}, {}};
  const auto names = summary.strings("window");
  const auto dx = summary.numbers("cell_dx");
  const auto dy = summary.numbers("cell_dy");
  const auto cw = cells.strings("window");
  const auto cx = cells.numbers("x1");
  const auto cy = cells.numbers("x2");
  const auto ow = obs.strings("period");
  const auto ox = obs.numbers("x1");
  const auto oy = obs.numbers("x2");
  const char* colors[2] = {kRed, kBlue};
  Series others{{}, {}, Series::Style::hollow_points, kGrey, "other"};
  for (std::size_t i = 0; i < ow.size(); ++i) {
    if (ow[i] == "other") {
      others.x.push_back(ox[i]);
      others.y.push_back(oy[i]);
    }
  }
  p.series.push_back(others);
  for (std::size_t k = 0; k < names.size(); ++k) {
    CellLayer layer{{}, {}, dx[k], dy[k], colors[k], 0.3, names[k]};
    for (std::size_t i = 0; i < cw.size(); ++i) {
      if (cw[i] == names[k]) {
        layer.x.push_back(cx[i]);
        layer.y.push_back(cy[i]);
      }
    }
    p.cells.push_back(layer);
    Series s{{}, {}, Series::Style::points, colors[k], ""};
    for (std::size_t i = 0; i < ow.size(); ++i) {
      if (ow[i] == names[k]) {
        s.x.push_back(ox[i]);
        s.y.push_back(oy[i]);
      }
    }
    p.series.push_back(s);
  }
  fig.panels.push_back(p);

  std::string report =
      fmt::format("# target_mass = 1 - 1 / (pairs_per_year * return_years), return_years = {:g}\n"
                  "# pairs_per_year = exceedance pairs in the window / (common non-missing days / 365.25)\n",
                  cfg.return_years);
  report += fmt::format("# grid = {} x {} cells\n", grid.count[0], grid.count[1]);
  for (int k = 0; k < 2; ++k) {
    report += fmt::format("{}: pairs_per_year = {:.6g}, target_mass = {:.6g}\n", spans[k].name(), wf[k].rate,
                          wf[k].target);
  }

  RunResult r;
  r.summary = report;
  r.artifacts = {{"region_report.txt", report},
                 {"region_summary.csv", summary.str()},
                 {"region_cells.csv", cells.str()},
                 {"region_observations.csv", obs.str()},
                 {"region.svg", fig.render()}};
  return r;
}

// --- simstudy --------------------------------------------------------------

RunResult cmd_simstudy(const RunConfig& cfg) {
  auto scenarios = cfg.config.empty() ? reference_scenarios() : load_scenarios(cfg.config);
  for (auto& sc : scenarios) {
    if (sc.threads == 0) sc.threads = cfg.threads;
  }
  std::vector<SimResult> results;
  results.reserve(scenarios.size());
  for (const auto& sc : scenarios) results.push_back(run_scenario(sc));

  CsvTable table({"scenario", "sample_size", "weight", "profile_lik", "weighted_boot_exp",
                  "weighted_boot_multinom"});
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    table.add_row({scenarios[i].name, integer(scenarios[i].n), num(scenarios[i].mixture_weight_w),
                   num(results[i].method("profile").coverage_pct),
                   num(results[i].method("boot-exp").coverage_pct),
                   num(results[i].method("boot-multinom").coverage_pct)});
  }
  RunResult r;
  r.summary = fmt::format("simstudy: {} scenarios\n", scenarios.size());
  r.artifacts = {{"coverage_table.csv", table.str()}, {"coverage_long.csv", format_results_csv(scenarios, results)}};
  return r;
}

// --- freq ------------------------------------------------------------------

RunResult cmd_freq(const RunConfig& cfg) {
  const auto series = load_station(cfg, cfg.station);
  CsvTable annual({"year", "count", "missing_fraction", "flagged"});
  for (const auto& y : annual_frequency(series, cfg.threshold)) {
    annual.add_row({integer(y.year), integer(y.count), num(y.missing_fraction), bool_cell(y.flagged)});
  }
  CsvTable monthly({"month", "count"});
  const auto months = monthly_frequency(series, cfg.threshold);
  for (int k = 0; k < 12; ++k) monthly.add_row({integer(k + 1), integer(months[static_cast<std::size_t>(k)])});

  Figure fig;
  fig.title = fmt::format("Days above {:g}, {}", cfg.threshold, cfg.station);
  fig.panels.push_back({"annual", "year", "count", false, {},
                        {{annual.numbers("year"), annual.numbers("count"), Series::Style::bars, kBlue, ""}}});
  fig.panels.push_back({"monthly", "month", "count", false, {},
                        {{monthly.numbers("month"), monthly.numbers("count"), Series::Style::bars, kBlue, ""}}});

  RunResult r;
  r.summary = fmt::format("freq {}: {} years\n", cfg.station, annual.rows().size());
  r.artifacts = {{"freq_annual.csv", annual.str()}, {"freq_monthly.csv", monthly.str()}, {"freq.svg", fig.render()}};
  return r;
}

}  // namespace

std::vector<std::pair<double, double>> qq_pairs(const GpdParams& fit, std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(sample.size());
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out.emplace_back(gpd_quantile(fit, (static_cast<double>(i) + 0.5) / n), sample[i]);
  }
  return out;
}

double region_target_mass(double pairs_per_year, double return_years) {
  const double mass = 1.0 - 1.0 / (pairs_per_year * return_years);
  if (!(mass > 0.0 && mass < 1.0)) {
    throw DomainError(fmt::format("fewer than one exceedance pair expected per {:g} years", return_years));
  }
  return mass;
}

RunResult execute(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.command == "fit") return cmd_fit(cfg);
  if (cfg.command == "returnlevel") return cmd_returnlevel(cfg);
  if (cfg.command == "window") return cmd_window(cfg);
  if (cfg.command == "bgpd") return cmd_bgpd(cfg);
  if (cfg.command == "region") return cmd_region(cfg);
  if (cfg.command == "simstudy") return cmd_simstudy(cfg);
  if (cfg.command == "freq") return cmd_freq(cfg);
  throw UsageError("unknown command '" + cfg.command + "'");
}

}  // namespace potwb::cli
