#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpresample/designs.hpp"
#include "fpresample/population.hpp"

namespace fpresample {

/// One simulation scenario, usually parsed from an INI-style config file
/// (one section per scenario).
struct ScenarioConfig {
  std::string name = "scenario";
  ModelSpec model;
  std::size_t population_size = 0;
  std::size_t sample_size = 0;
  DesignSpec sampling_design{DesignKind::kPareto};
  DesignSpec resampling_design{DesignKind::kPareto};
  std::size_t bootstrap_replicates = 500;
  std::size_t replications = 300;
  std::vector<double> p_grid;
  double alpha = 0.05;
  std::vector<double> alpha_grid;  // optional; defaults to {alpha}
  std::vector<double> rho_grid;    // optional power grid
  std::uint64_t seed = 1;
  int threads = 0;  // 0: env/hardware
  std::size_t oracle_sims = 1000000;

  void validate() const;  // throws ConfigError

  /// "desk" (300 populations, 500 replicates) or "paper" (1000/1000).
  void set_profile(const std::string& name);
};

/// Parse every [section] of an INI-style stream into scenarios.
std::vector<ScenarioConfig> parse_scenarios(std::istream& in);
std::vector<ScenarioConfig> load_scenarios(const std::string& path);
/// Pick one scenario by name ("" selects a sole section).
ScenarioConfig load_scenario(const std::string& path, const std::string& name);

struct QuantileCell {
  double p = 0.0;
  std::uint64_t covered = 0;
  std::uint64_t missed_left = 0;   // lower bound above the target
  std::uint64_t missed_right = 0;  // upper bound below the target
  std::uint64_t reps = 0;
  double total_length = 0.0;
  double target = 0.0;  // oracle quantile

  double cp() const { return ratio(covered); }
  double le() const { return ratio(missed_left); }
  double re() const { return ratio(missed_right); }
  double al() const { return total_length / static_cast<double>(reps); }
  double rate_se(double r) const;

 private:
  double ratio(std::uint64_t c) const { return static_cast<double>(c) / static_cast<double>(reps); }
};

struct TestCell {
  double rho = 0.0;
  double alpha = 0.0;
  std::string scenario;  // e.g. "pa-pa", "cp-pa"
  std::uint64_t rejections = 0;
  std::uint64_t reps = 0;
  double median_p_value = -1.0;  // negative when the test has no p-values

  double rate() const { return static_cast<double>(rejections) / static_cast<double>(reps); }
  double rate_se() const;
};

enum class StudyKind { kQuantile, kConditionalTest, kMarginalTest };

struct IndicatorReport {
  StudyKind kind = StudyKind::kQuantile;
  std::string scenario_name;
  std::vector<QuantileCell> quantile_cells;
  std::vector<TestCell> test_cells;

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

/// Replicated confidence-interval study: per replicate generate a
/// population, draw a sample, build intervals for the whole p-grid, and
/// score them against the model's oracle quantiles.
IndicatorReport run_quantile_study(const ScenarioConfig& config);

enum class TestKind { kConditional, kMarginal };

/// Replicated testing study: rejection rate at the model's rho (type-I
/// error when rho = 0), optionally across a rho grid (power curve), with
/// the median p-value for the conditional test.
IndicatorReport run_test_study(const ScenarioConfig& config, TestKind test);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// CLI entry point (subcommands documented in the README). Returns the
/// process exit code: 0 success, 2 config error, 3 numeric failure.
int cli_main(int argc, char** argv);

}  // namespace fpresample
