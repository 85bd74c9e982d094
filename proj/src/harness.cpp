#include "fpresample/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fpresample/errors.hpp"
#include "fpresample/infer.hpp"
#include "fpresample/parallel.hpp"
#include "fpresample/resample.hpp"

namespace fpresample {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FPRESAMPLE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void ScenarioConfig::validate() const {
  try {
    model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (population_size == 0 || sample_size == 0 || sample_size > population_size) {
    throw ConfigError("sample size must satisfy 0 < n <= N");
  }
  if (bootstrap_replicates < 2) throw ConfigError("M must be at least 2");
  if (replications < 1) throw ConfigError("reps must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  for (double p : p_grid) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("p grid values must lie in (0,1)");
  }
  for (double a : alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha grid values must lie in (0,1)");
  }
  for (double r : rho_grid) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("rho grid values must lie in [0,1]");
  }
  if (sampling_design.kind == DesignKind::kPoisson) {
    throw ConfigError("studies need a fixed-size sampling design");
  }
  if (!resampling_design.fixed_size()) {
    throw ConfigError("resampling design must be fixed-size");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<double> parse_list(const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (in >> item) {
    if (!item.empty() && item.back() == ',') item.pop_back();
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "quantile") return ModelKind::kQuantile;
  if (name == "stratified") return ModelKind::kStratified;
  if (name == "marshall-olkin") return ModelKind::kMarshallOlkin;
  throw ConfigError("unknown model kind: " + name);
}

void apply_key(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "model") {
      cfg.model.kind = model_kind_from_string(value);
    } else if (key == "rho_s") {
      cfg.model.spearman_rho = std::stod(value);
    } else if (key == "mo_size_log_var") {
      cfg.model.mo_size_log_var = std::stod(value);
    } else if (key == "N") {
      cfg.population_size = static_cast<std::size_t>(std::stoull(value));
    } else if (key == "n") {
      cfg.sample_size = static_cast<std::size_t>(std::stoull(value));
    } else if (key == "sampling_design") {
      cfg.sampling_design.kind = design_kind_from_string(value);
    } else if (key == "resampling_design") {
      cfg.resampling_design.kind = design_kind_from_string(value);
    } else if (key == "M") {
      cfg.bootstrap_replicates = static_cast<std::size_t>(std::stoull(value));
    } else if (key == "reps") {
      cfg.replications = static_cast<std::size_t>(std::stoull(value));
    } else if (key == "p_grid") {
      cfg.p_grid = parse_list(value);
    } else if (key == "alpha") {
      cfg.alpha = std::stod(value);
    } else if (key == "alpha_grid") {
      cfg.alpha_grid = parse_list(value);
    } else if (key == "rho_grid") {
      cfg.rho_grid = parse_list(value);
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "threads") {
      cfg.threads = std::stoi(value);
    } else if (key == "oracle_sims") {
      cfg.oracle_sims = static_cast<std::size_t>(std::stoull(value));
    } else if (key == "profile") {
      cfg.set_profile(value);
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad value for key '" + key + "': " + value);
  }
}

}  // namespace

std::vector<ScenarioConfig> parse_scenarios(std::istream& in) {
  std::vector<ScenarioConfig> scenarios;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      ScenarioConfig cfg;
      cfg.name = trim(s.substr(1, s.size() - 2));
      scenarios.push_back(std::move(cfg));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    if (scenarios.empty()) {
      // Sectionless files define a single anonymous scenario.
      scenarios.emplace_back();
    }
    apply_key(scenarios.back(), trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (scenarios.empty()) throw ConfigError("config defines no scenario");
  return scenarios;
}

std::vector<ScenarioConfig> load_scenarios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_scenarios(in);
}

ScenarioConfig load_scenario(const std::string& path, const std::string& name) {
  auto scenarios = load_scenarios(path);
  if (name.empty()) {
    if (scenarios.size() != 1) {
      throw ConfigError("config '" + path + "' holds " + std::to_string(scenarios.size()) +
                        " scenarios; pick one with --scenario");
    }
    return scenarios.front();
  }
  for (auto& s : scenarios) {
    if (s.name == name) return s;
  }
  throw ConfigError("scenario '" + name + "' not found in " + path);
}

void ScenarioConfig::set_profile(const std::string& name) {
  if (name == "desk") {
    replications = 300;
    bootstrap_replicates = 500;
  } else if (name == "paper") {
    // Full-scale study: 1000 populations, 1000 resampling replicates each.
    replications = 1000;
    bootstrap_replicates = 1000;
  } else {
    throw ConfigError("unknown profile: " + name + " (expected desk or paper)");
  }
}

double QuantileCell::rate_se(double r) const {
  return std::sqrt(r * (1.0 - r) / static_cast<double>(reps));
}

double TestCell::rate_se() const {
  const double r = rate();
  return std::sqrt(r * (1.0 - r) / static_cast<double>(reps));
}

std::string format_double(double v) {
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void IndicatorReport::write_csv(std::ostream& out) const {
  if (kind == StudyKind::kQuantile) {
    out << "metric";
    for (const auto& cell : quantile_cells) out << ",p=" << format_double(cell.p);
    out << "\n";
    const auto row = [&](const char* name, auto getter) {
      out << name;
      for (const auto& cell : quantile_cells) out << "," << format_double(getter(cell));
      out << "\n";
    };
    row("CP", [](const QuantileCell& c) { return c.cp(); });
    row("LE", [](const QuantileCell& c) { return c.le(); });
    row("RE", [](const QuantileCell& c) { return c.re(); });
    row("AL", [](const QuantileCell& c) { return c.al(); });
    row("CP_se", [](const QuantileCell& c) { return c.rate_se(c.cp()); });
    row("LE_se", [](const QuantileCell& c) { return c.rate_se(c.le()); });
    row("RE_se", [](const QuantileCell& c) { return c.rate_se(c.re()); });
    row("target", [](const QuantileCell& c) { return c.target; });
    row("reps", [](const QuantileCell& c) { return static_cast<double>(c.reps); });
    return;
  }
  out << "scenario,rho,alpha,rate,rate_se,median_p,reps\n";
  for (const auto& cell : test_cells) {
    out << cell.scenario << "," << format_double(cell.rho) << "," << format_double(cell.alpha)
        << "," << format_double(cell.rate()) << "," << format_double(cell.rate_se()) << ",";
    if (cell.median_p_value >= 0.0) out << format_double(cell.median_p_value);
    out << "," << cell.reps << "\n";
  }
}

void IndicatorReport::write_json(std::ostream& out) const {
  nlohmann::json j;
  j["scenario"] = scenario_name;
  switch (kind) {
    case StudyKind::kQuantile: j["study"] = "quantile"; break;
    case StudyKind::kConditionalTest: j["study"] = "conditional-test"; break;
    case StudyKind::kMarginalTest: j["study"] = "marginal-test"; break;
  }
  if (kind == StudyKind::kQuantile) {
    auto& cells = j["cells"] = nlohmann::json::array();
    for (const auto& c : quantile_cells) {
      cells.push_back({{"p", c.p},
                       {"CP", c.cp()},
                       {"LE", c.le()},
                       {"RE", c.re()},
                       {"AL", c.al()},
                       {"CP_se", c.rate_se(c.cp())},
                       {"LE_se", c.rate_se(c.le())},
                       {"RE_se", c.rate_se(c.re())},
                       {"target", c.target},
                       {"reps", c.reps}});
    }
  } else {
    auto& cells = j["cells"] = nlohmann::json::array();
    for (const auto& c : test_cells) {
      nlohmann::json cell = {{"scenario", c.scenario}, {"rho", c.rho},       {"alpha", c.alpha},
                             {"rate", c.rate()},       {"rate_se", c.rate_se()}, {"reps", c.reps}};
      if (c.median_p_value >= 0.0) cell["median_p"] = c.median_p_value;
      cells.push_back(std::move(cell));
    }
  }
  out << j.dump(2) << "\n";
}

namespace {

std::string scenario_label(const ScenarioConfig& cfg) {
  const auto tag = [](DesignKind k) {
    switch (k) {
      case DesignKind::kSrs: return "srs";
      case DesignKind::kPoisson: return "po";
      case DesignKind::kConditionalPoisson: return "cp";
      case DesignKind::kPareto: return "pa";
    }
    return "?";
  };
  return std::string(tag(cfg.sampling_design.kind)) + "-" + tag(cfg.resampling_design.kind);
}

SampleData draw_scenario_sample(const ScenarioConfig& cfg, const ModelSpec& model,
                                StreamKey replicate_key) {
  Rng pop_rng = replicate_key.child(0).rng();
  const Population pop = generate(model, cfg.population_size, pop_rng);
  const InclusionProbs probs = design_inclusion_probs(cfg.sampling_design, pop.x, cfg.sample_size);
  Rng draw_rng = replicate_key.child(1).rng();
  const SampleIndicator d = draw_design(cfg.sampling_design, probs, draw_rng);
  return extract_sample(pop, probs, d);
}

double median_of(std::vector<double> values) {
  if (values.empty()) return -1.0;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

}  // namespace

IndicatorReport run_quantile_study(const ScenarioConfig& config) {
  config.validate();
  if (config.p_grid.empty()) throw ConfigError("quantile study needs a p grid");

  const StreamKey master{config.seed};
  const std::size_t n_p = config.p_grid.size();

  // Ground truth from the model itself, independent stream.
  std::vector<double> targets(n_p);
  {
    Rng oracle_rng = master.child(0xA0).rng();
    for (std::size_t k = 0; k < n_p; ++k) {
      targets[k] = true_quantile_oracle(config.model, config.p_grid[k], config.oracle_sims,
                                        oracle_rng);
    }
  }

  struct ReplicateOutcome {
    std::vector<double> lower, upper;
  };
  std::vector<ReplicateOutcome> outcomes(config.replications);

  parallel_for(config.replications, resolve_threads(config.threads), [&](std::size_t j) {
    const StreamKey rep = master.child(1).child(j);
    const SampleData sample = draw_scenario_sample(config, config.model, rep);
    const auto cis = quantile_ci_batch(sample, config.p_grid, config.alpha,
                                       config.bootstrap_replicates, config.resampling_design,
                                       rep.child(2));
    auto& slot = outcomes[j];
    slot.lower.resize(n_p);
    slot.upper.resize(n_p);
    for (std::size_t k = 0; k < n_p; ++k) {
      slot.lower[k] = cis[k].lower;
      slot.upper[k] = cis[k].upper;
    }
  });

  IndicatorReport report;
  report.kind = StudyKind::kQuantile;
  report.scenario_name = config.name;
  for (std::size_t k = 0; k < n_p; ++k) {
    QuantileCell cell;
    cell.p = config.p_grid[k];
    cell.target = targets[k];
    cell.reps = config.replications;
    for (const auto& o : outcomes) {
      const double lo = o.lower[k];
      const double hi = o.upper[k];
      cell.total_length += hi - lo;
      if (lo > targets[k]) {
        ++cell.missed_left;
      } else if (hi < targets[k]) {
        ++cell.missed_right;
      } else {
        ++cell.covered;
      }
    }
    report.quantile_cells.push_back(cell);
  }
  return report;
}

IndicatorReport run_test_study(const ScenarioConfig& config, TestKind test) {
  config.validate();
  if (test == TestKind::kConditional && config.model.kind != ModelKind::kStratified) {
    throw ConfigError("conditional test study needs the stratified model");
  }
  if (test == TestKind::kMarginal && config.model.kind != ModelKind::kMarshallOlkin) {
    throw ConfigError("marginal test study needs the marshall-olkin model");
  }

  std::vector<double> rhos = config.rho_grid;
  if (rhos.empty()) rhos.push_back(config.model.spearman_rho);
  std::vector<double> alphas = config.alpha_grid;
  if (alphas.empty()) alphas.push_back(config.alpha);

  const StreamKey master{config.seed};
  IndicatorReport report;
  report.kind = test == TestKind::kConditional ? StudyKind::kConditionalTest
                                               : StudyKind::kMarginalTest;
  report.scenario_name = config.name;
  const std::string label = scenario_label(config);

  for (std::size_t r = 0; r < rhos.size(); ++r) {
    ModelSpec model = config.model;
    model.spearman_rho = rhos[r];

    struct Outcome {
      std::vector<std::uint8_t> rejected;
      double p_value = -1.0;
    };
    std::vector<Outcome> outcomes(config.replications);

    parallel_for(config.replications, resolve_threads(config.threads), [&](std::size_t j) {
      const StreamKey rep = master.child(100 + r).child(j);
      const SampleData sample = draw_scenario_sample(config, model, rep);
      auto& slot = outcomes[j];
      slot.rejected.resize(alphas.size());
      if (test == TestKind::kConditional) {
        for (std::size_t a = 0; a < alphas.size(); ++a) {
          const TestResult res =
              cond_independence_test(sample, alphas[a], config.bootstrap_replicates,
                                     config.resampling_design, rep.child(2));
          slot.rejected[a] = res.reject ? 1 : 0;
          if (a == 0 && res.p_value) slot.p_value = *res.p_value;
        }
      } else {
        const auto results = marg_independence_test_multi(
            sample, alphas, config.bootstrap_replicates, config.resampling_design, rep.child(2));
        for (std::size_t a = 0; a < alphas.size(); ++a) {
          slot.rejected[a] = results[a].reject ? 1 : 0;
        }
      }
    });

    for (std::size_t a = 0; a < alphas.size(); ++a) {
      TestCell cell;
      cell.rho = rhos[r];
      cell.alpha = alphas[a];
      cell.scenario = label;
      cell.reps = config.replications;
      for (const auto& o : outcomes) cell.rejections += o.rejected[a];
      if (test == TestKind::kConditional && a == 0) {
        std::vector<double> ps;
        for (const auto& o : outcomes) {
          if (o.p_value >= 0.0) ps.push_back(o.p_value);
        }
        cell.median_p_value = median_of(std::move(ps));
      }
      report.test_cells.push_back(std::move(cell));
    }
  }
  return report;
}

}  // namespace fpresample
