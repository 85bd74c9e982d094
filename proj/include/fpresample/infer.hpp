#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fpresample/resample.hpp"

namespace fpresample {

/// Inverse standard normal cdf; Acklam's rational approximation plus one
/// Halley refinement, absolute error well below 1e-9.
double normal_quantile(double p);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;  // 1 - alpha
  double point = 0.0;
  /// Set when the resampling variance degenerated to zero on
  /// non-degenerate data and the interval collapsed to the point.
  bool degenerate = false;
};

/// Normal-quantile interval for the p-th quantile with the resampling
/// standard deviation: point + z_{alpha/2} S*/sqrt(n) ... z_{1-alpha/2}.
ConfidenceInterval quantile_ci(const SampleData& sample, double p, double alpha,
                               std::size_t bootstrap_replicates, const DesignSpec& design,
                               StreamKey key);

/// One shared bootstrap serving a whole p-grid.
std::vector<ConfidenceInterval> quantile_ci_batch(const SampleData& sample,
                                                  std::span<const double> p_grid, double alpha,
                                                  std::size_t bootstrap_replicates,
                                                  const DesignSpec& design, StreamKey key);

struct TestResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  std::optional<double> p_value;  // absent for the interval-inversion test
  double alpha = 0.0;
};

/// Rank-correlation independence test of the two study variables given the
/// stratum labels. The critical value is the two-sided absolute-value
/// quantile of the statistic recomputed on conditional-null resamples.
TestResult cond_independence_test(const SampleData& sample, double alpha,
                                  std::size_t bootstrap_replicates, const DesignSpec& design,
                                  StreamKey key);

/// Marginal independence test by interval inversion: reject when zero lies
/// outside the normal-quantile interval for the dependence measure. No
/// p-value (there is no null resampling here).
TestResult marg_independence_test(const SampleData& sample, double alpha,
                                  std::size_t bootstrap_replicates, const DesignSpec& design,
                                  StreamKey key);

/// All alpha levels served by one shared bootstrap run.
std::vector<TestResult> marg_independence_test_multi(const SampleData& sample,
                                                     std::span<const double> alphas,
                                                     std::size_t bootstrap_replicates,
                                                     const DesignSpec& design, StreamKey key);

}  // namespace fpresample
