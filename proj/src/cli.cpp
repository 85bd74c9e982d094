#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fpresample/diagnostics.hpp"
#include "fpresample/errors.hpp"
#include "fpresample/harness.hpp"
#include "fpresample/infer.hpp"
#include "fpresample/resample.hpp"

namespace fpresample {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct OutputOptions {
  std::string path;  // empty: stdout
  std::string format = "csv";
};

template <typename Writable>
void emit(const Writable& value, const OutputOptions& opts) {
  std::ostringstream buffer;
  if (opts.format == "json") {
    value.write_json(buffer);
  } else {
    value.write_csv(buffer);
  }
  if (opts.path.empty()) {
    std::cout << buffer.str();
    return;
  }
  std::ofstream out(opts.path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + opts.path);
  out << buffer.str();
}

struct CiReport {
  ConfidenceInterval ci;
  void write_csv(std::ostream& out) const {
    out << "point,lower,upper,level,degenerate\n";
    out << format_double(ci.point) << "," << format_double(ci.lower) << ","
        << format_double(ci.upper) << "," << format_double(ci.level) << ","
        << (ci.degenerate ? 1 : 0) << "\n";
  }
  void write_json(std::ostream& out) const {
    out << "{\"point\":" << format_double(ci.point) << ",\"lower\":" << format_double(ci.lower)
        << ",\"upper\":" << format_double(ci.upper) << ",\"level\":" << format_double(ci.level)
        << ",\"degenerate\":" << (ci.degenerate ? "true" : "false") << "}\n";
  }
};

/// Dataset rows for the one-shot interval subcommand: a CSV with header
/// y,pi[,x] describing the drawn sample.
SampleData read_sample_csv(const std::string& path, std::size_t population) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty data file: " + path);

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int y_col = -1, pi_col = -1, x_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") y_col = static_cast<int>(c);
    if (header[c] == "pi") pi_col = static_cast<int>(c);
    if (header[c] == "x") x_col = static_cast<int>(c);
  }
  if (y_col < 0 || pi_col < 0) throw ConfigError("data file needs 'y' and 'pi' columns");

  SampleData sample;
  sample.population_size = population;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != header.size()) {
      throw ConfigError("data file line " + std::to_string(line_no) + ": wrong column count");
    }
    sample.y.push_back(row[static_cast<std::size_t>(y_col)]);
    sample.pi.push_back(row[static_cast<std::size_t>(pi_col)]);
    sample.x.push_back(x_col >= 0 ? row[static_cast<std::size_t>(x_col)]
                                  : row[static_cast<std::size_t>(pi_col)]);
  }
  if (sample.y.empty()) throw ConfigError("data file holds no rows: " + path);
  return sample;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Finite-population resampling toolkit"};
  app.require_subcommand(1);

  OutputOptions output;
  std::optional<std::uint64_t> seed_override;
  int threads = 0;
  std::string profile;
  app.add_option("--out", output.path, "Write results to this file (default: stdout)");
  app.add_option("--format", output.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed_override, "Override the scenario seed");
  app.add_option("--threads", threads, "Worker threads (0: FPRESAMPLE_THREADS or all cores)");
  app.add_option("--profile", profile, "Study scale: desk (300/500) or paper (1000/1000)")
      ->check(CLI::IsMember({"desk", "paper"}));

  std::string config_path, scenario_name;
  const auto add_config = [&](CLI::App* cmd) {
    cmd->fallthrough();  // global flags may follow the subcommand name
    cmd->add_option("--config", config_path, "Scenario config file")->required();
    cmd->add_option("--scenario", scenario_name, "Section name when the file has several");
  };

  auto* sim_quantile = app.add_subcommand("simulate-quantile", "Replicated quantile-interval study");
  add_config(sim_quantile);
  auto* sim_cond = app.add_subcommand("simulate-cond-test",
                                      "Replicated conditional independence test study");
  add_config(sim_cond);
  auto* sim_marg = app.add_subcommand("simulate-marg-test",
                                      "Replicated marginal independence test study");
  add_config(sim_marg);

  // quantile-ci: one dataset in, one interval out.
  std::string data_path;
  std::size_t ci_population = 0;
  double ci_p = 0.5, ci_alpha = 0.05;
  std::size_t ci_m = 1000;
  std::string ci_design = "pareto";
  std::uint64_t ci_seed = 1;
  auto* ci_cmd = app.add_subcommand("quantile-ci", "Interval for one drawn sample");
  ci_cmd->fallthrough();
  ci_cmd->add_option("--data", data_path, "CSV with header y,pi[,x]")->required();
  ci_cmd->add_option("--population-size", ci_population, "Frame size N")->required();
  ci_cmd->add_option("--p", ci_p, "Quantile level");
  ci_cmd->add_option("--alpha", ci_alpha, "1 - confidence level");
  ci_cmd->add_option("--m", ci_m, "Resampling replicates");
  ci_cmd->add_option("--design", ci_design, "Resampling design")
      ->check(CLI::IsMember({"pareto", "conditional-poisson", "srs"}));
  ci_cmd->add_option("--ci-seed", ci_seed, "Seed when --seed is not given");

  // design-check: inclusion-probability and enumeration diagnostics.
  DesignCheckSettings design_settings;
  std::string check_design = "pareto";
  auto* design_cmd = app.add_subcommand("design-check", "Design diagnostics");
  design_cmd->fallthrough();
  design_cmd->add_option("--design", check_design, "Design kind")
      ->check(CLI::IsMember({"srs", "poisson", "conditional-poisson", "pareto"}));
  design_cmd->add_option("--population-size", design_settings.population_size, "Frame size N");
  design_cmd->add_option("--sample-size", design_settings.sample_size, "Sample size n");
  design_cmd->add_option("--size-spread", design_settings.size_spread,
                         "Linear spread of the size variable");
  design_cmd->add_option("--draws", design_settings.draws, "Monte Carlo draws");

  // kernel-check: MC covariance against the analytic kernel.
  std::string kernel_config_path, kernel_scenario;
  auto* kernel_cmd = app.add_subcommand("kernel-check",
                                        "Monte Carlo covariance vs the analytic kernel");
  kernel_cmd->fallthrough();
  kernel_cmd->add_option("--config", kernel_config_path, "Scenario config file")->required();
  kernel_cmd->add_option("--scenario", kernel_scenario, "Section name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim_quantile || *sim_cond || *sim_marg) {
      ScenarioConfig cfg = load_scenario(config_path, scenario_name);
      if (!profile.empty()) cfg.set_profile(profile);
      if (seed_override) cfg.seed = *seed_override;
      if (threads > 0) cfg.threads = threads;
      IndicatorReport report;
      if (*sim_quantile) {
        report = run_quantile_study(cfg);
      } else if (*sim_cond) {
        report = run_test_study(cfg, TestKind::kConditional);
      } else {
        report = run_test_study(cfg, TestKind::kMarginal);
      }
      emit(report, output);
    } else if (*ci_cmd) {
      const SampleData sample = read_sample_csv(data_path, ci_population);
      DesignSpec design{design_kind_from_string(ci_design)};
      const StreamKey key{seed_override.value_or(ci_seed)};
      CiReport report{quantile_ci(sample, ci_p, ci_alpha, ci_m, design, key)};
      emit(report, output);
    } else if (*design_cmd) {
      design_settings.design.kind = design_kind_from_string(check_design);
      if (seed_override) design_settings.seed = *seed_override;
      emit(run_design_check(design_settings), output);
    } else if (*kernel_cmd) {
      const ScenarioConfig cfg = load_scenario(kernel_config_path, kernel_scenario);
      KernelCheckSettings settings;
      settings.model = cfg.model;
      settings.population_size = cfg.population_size;
      settings.sample_size = cfg.sample_size;
      settings.design = cfg.sampling_design;
      settings.replicates = cfg.replications;
      settings.seed = seed_override.value_or(cfg.seed);
      settings.threads = threads > 0 ? threads : cfg.threads;
      emit(run_kernel_check(settings), output);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace fpresample
