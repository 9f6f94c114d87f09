#include "potwb/simstudy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "potwb/bootstrap.hpp"
#include "potwb/errors.hpp"
#include "potwb/parallel.hpp"
#include "potwb/profile.hpp"

namespace potwb {

void SimScenario::validate() const {
  if (n < static_cast<int>(kMinFitSize)) throw UsageError("scenario sample size below the fit minimum");
  if (!(mixture_weight_w >= 0.0 && mixture_weight_w <= 1.0)) {
    throw DomainError("mixture weight must lie in [0, 1]");
  }
  if (!(return_period_m > 0.0) || !(exceedances_per_year > 0.0)) {
    throw DomainError("return period and exceedance rate must be positive");
  }
  if (!(return_period_m * exceedances_per_year > 1.0)) {
    throw DomainError("return period shorter than the mean exceedance spacing");
  }
  if (!(conf_level > 0.0 && conf_level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  if (replications < 1) throw UsageError("replications must be >= 1");
  if (boot_replicates < 1) throw UsageError("boot_replicates must be >= 1");
}

double SimScenario::level_q() const { return 1.0 - 1.0 / (return_period_m * exceedances_per_year); }

const MethodCoverage& SimResult::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw UsageError("no method named " + name);
}

std::vector<double> simulate_mixture(const SimScenario& sc, RandomStream& rng) {
  std::vector<double> out(static_cast<std::size_t>(sc.n));
  for (auto& x : out) {
    const bool first = rng.uniform() < sc.mixture_weight_w;
    x = gpd_quantile(first ? sc.comp1 : sc.comp2, rng.uniform());
  }
  return out;
}

double mixture_cdf(const SimScenario& sc, double x) {
  if (!(x > 0.0)) return 0.0;
  const auto component = [x](const GpdParams& p) { return x >= p.upper_endpoint() ? 1.0 : gpd_cdf(p, x); };
  const double w = sc.mixture_weight_w;
  return w * component(sc.comp1) + (1.0 - w) * component(sc.comp2);
}

double mixture_quantile(const SimScenario& sc, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("mixture quantile level must lie in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  while (mixture_cdf(sc, hi) < q) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("mixture quantile bracket overflow");
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (mixture_cdf(sc, mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SimResult run_scenario(const SimScenario& sc) {
  sc.validate();
  const double q = sc.level_q();
  const auto conf = ConfidenceSpec::from_level(sc.conf_level);
  const OptimizerConfig cfg;
  BootstrapOptions inner;
  inner.threads = 1;

  SimResult res;
  res.true_return_level = mixture_quantile(sc, q);
  res.replications = sc.replications;

  constexpr int kMethods = 3;
  struct Outcome {
    bool built[kMethods] = {false, false, false};
    bool hit[kMethods] = {false, false, false};
    double width[kMethods] = {0.0, 0.0, 0.0};
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(sc.replications));
  const double truth = res.true_return_level;

  parallel_for(outcomes.size(), sc.threads, [&](std::size_t i) {
    auto rng = RandomStream::derive(sc.seed, i);
    const auto sample = simulate_mixture(sc, rng);
    auto& out = outcomes[i];
    const auto record = [&](int k, double lower, double upper) {
      out.built[k] = true;
      out.hit[k] = lower <= truth && truth <= upper;
      out.width[k] = upper - lower;
    };
    try {
      const auto iv = profile_interval(sample, q, conf, cfg);
      record(0, iv.lower, iv.upper);
    } catch (const NumericalError&) {
    } catch (const DataError&) {
    }
    const WeightScheme schemes[2] = {WeightScheme::exponential(), WeightScheme::multinomial()};
    for (int s = 0; s < 2; ++s) {
      const auto boot_seed = RandomStream::derive(sc.seed, i, 1 + static_cast<std::uint64_t>(s))();
      try {
        const auto b = boot_interval(sample, q, schemes[s], conf, sc.boot_replicates, boot_seed,
                                     cfg, inner);
        record(1 + s, b.lower_mean, b.upper_mean);
      } catch (const NumericalError&) {
      } catch (const DataError&) {
      }
    }
  });

  const char* names[kMethods] = {"profile", "boot-exp", "boot-multinom"};
  for (int k = 0; k < kMethods; ++k) {
    MethodCoverage mc;
    mc.method = names[k];
    int hits = 0;
    int built = 0;
    CompensatedSum widths;
    for (const auto& o : outcomes) {
      if (!o.built[k]) {
        ++mc.failures;
        continue;
      }
      ++built;
      widths.add(o.width[k]);
      if (o.hit[k]) ++hits;
    }
    mc.coverage_pct = 100.0 * hits / sc.replications;
    mc.mean_width = built > 0 ? widths.value() / built : std::nan("");
    res.methods.push_back(mc);
  }
  return res;
}

std::vector<SimScenario> reference_scenarios() {
  const std::pair<int, double> rows[] = {{50, 1.0},   {100, 1.0}, {200, 1.0},
                                         {200, 0.5},  {500, 0.5}, {500, 0.8}};
  std::vector<SimScenario> out;
  for (const auto& [n, w] : rows) {
    SimScenario sc;
    sc.n = n;
    sc.mixture_weight_w = w;
    char name[32];
    std::snprintf(name, sizeof name, "n%d_w%g", n, w);
    sc.name = name;
    out.push_back(sc);
  }
  return out;
}

namespace {

GpdParams component_from_json(const nlohmann::json& j, const GpdParams& fallback) {
  return GpdParams(j.value("sigma", fallback.sigma()), j.value("xi", fallback.xi()));
}

SimScenario scenario_from_json(const nlohmann::json& j) {
  SimScenario sc;
  sc.name = j.value("name", sc.name);
  sc.n = j.value("n", sc.n);
  sc.mixture_weight_w = j.value("w", sc.mixture_weight_w);
  if (j.contains("comp1")) sc.comp1 = component_from_json(j.at("comp1"), sc.comp1);
  if (j.contains("comp2")) sc.comp2 = component_from_json(j.at("comp2"), sc.comp2);
  sc.return_period_m = j.value("return_period_m", sc.return_period_m);
  sc.exceedances_per_year = j.value("exceedances_per_year", sc.exceedances_per_year);
  sc.conf_level = j.value("conf_level", sc.conf_level);
  sc.replications = j.value("replications", sc.replications);
  sc.boot_replicates = j.value("boot_replicates", sc.boot_replicates);
  sc.seed = j.value("seed", sc.seed);
  sc.threads = j.value("threads", sc.threads);
  sc.validate();
  return sc;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<SimScenario> parse_scenarios(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scenario file is not valid JSON: ") + e.what());
  }
  const nlohmann::json& list = doc.is_object() && doc.contains("scenarios") ? doc.at("scenarios") : doc;
  if (!list.is_array()) throw FormatError("expected an array of scenarios");
  std::vector<SimScenario> out;
  for (const auto& j : list) {
    try {
      out.push_back(scenario_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad scenario entry: ") + e.what());
    }
  }
  return out;
}

std::vector<SimScenario> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenarios(buf.str());
}

std::string format_results_csv(const std::vector<SimScenario>& scenarios,
                               const std::vector<SimResult>& results) {
  if (scenarios.size() != results.size()) throw UsageError("one result per scenario expected");
  std::string out =
      "scenario,n,w,method,coverage_pct,mean_width,failures,replications,true_return_level\n";
  char line[512];
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    for (const auto& m : results[i].methods) {
      std::snprintf(line, sizeof line, "%s,%d,%.10g,%s,%.10g,%.10g,%d,%d,%.10g\n",
                    csv_field(scenarios[i].name).c_str(), scenarios[i].n, scenarios[i].mixture_weight_w,
                    m.method.c_str(), m.coverage_pct, m.mean_width, m.failures,
                    results[i].replications, results[i].true_return_level);
      out += line;
    }
  }
  return out;
}

}  // namespace potwb
