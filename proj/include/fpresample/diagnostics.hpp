#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fpresample/designs.hpp"
#include "fpresample/population.hpp"

namespace fpresample {

/// Monte Carlo covariance of the root-n-scaled deviation of the
/// ratio-weighted d.f. from the model d.f., on a grid of reference
/// quantiles, against the analytic covariance kernel.
struct KernelCheckCell {
  double y = 0.0;
  double t = 0.0;
  double mc_cov = 0.0;
  double kernel = 0.0;
};

struct KernelCheckResult {
  std::vector<double> grid;
  std::vector<KernelCheckCell> cells;
  double max_rel_dev = 0.0;

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

struct KernelCheckSettings {
  ModelSpec model;
  std::size_t population_size = 2000;
  std::size_t sample_size = 200;
  DesignSpec design{DesignKind::kPareto};
  std::size_t replicates = 2000;
  std::size_t reference_size = 500000;
  /// Reference-quantile levels of the grid points.
  std::vector<double> grid_levels{0.3, 0.4, 0.5, 0.6, 0.7};
  std::uint64_t seed = 1;
  int threads = 0;
};

KernelCheckResult run_kernel_check(const KernelCheckSettings& settings);

/// Design diagnostics: empirical inclusion frequencies against targets,
/// plus exact entropy / Hellinger-vs-rejective numbers when the population
/// is small enough to enumerate.
struct DesignCheckResult {
  std::vector<double> target_pi;
  std::vector<double> empirical_pi;
  double max_inclusion_dev = 0.0;
  /// Calibration residual for the conditional Poisson design, else 0.
  double calibration_dev = 0.0;
  bool enumerated = false;
  double entropy = 0.0;
  double hellinger_vs_rejective = 0.0;

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

struct DesignCheckSettings {
  DesignSpec design{DesignKind::kPareto};
  std::size_t population_size = 8;
  std::size_t sample_size = 3;
  /// Size values ramp linearly from 1 to 1 + spread.
  double size_spread = 1.0;
  std::size_t draws = 200000;
  std::uint64_t seed = 1;
};

DesignCheckResult run_design_check(const DesignCheckSettings& settings);

}  // namespace fpresample
