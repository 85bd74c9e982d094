#include "fpresample/infer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include "fpresample/errors.hpp"

namespace fpresample {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");

  // Acklam's coefficients.
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double dd[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }

  // One Halley step against the exact cdf brings the result to full
  // double precision.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

namespace {

ConfidenceInterval interval_from(double point, double s_star, double n, double alpha) {
  ConfidenceInterval ci;
  ci.point = point;
  ci.level = 1.0 - alpha;
  const double half_lo = normal_quantile(alpha / 2.0);
  const double half_hi = normal_quantile(1.0 - alpha / 2.0);
  const double scale = s_star / std::sqrt(n);
  ci.lower = point + half_lo * scale;
  ci.upper = point + half_hi * scale;
  ci.degenerate = s_star == 0.0;
  return ci;
}

// Resampling-test critical value: the ceil(q (M+1))-th order statistic, the
// convention under which comparing the observed statistic against M
// exchangeable replicates is exactly level 1-q.
double resampling_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  const std::size_t k = std::min(
      m - 1, static_cast<std::size_t>(std::ceil(q * static_cast<double>(m + 1))) - 1);
  return values[k];
}

void require_usable_strata(const SampleData& sample) {
  if (!sample.has_t() || !sample.has_z()) {
    throw std::invalid_argument("cond_independence_test: sample lacks strata or z values");
  }
  // Cells are derived from the sample itself, so every present label is
  // populated; single-point cells are handled by the plug-in statistic.
  std::set<double> distinct_overall(sample.y.begin(), sample.y.end());
  if (distinct_overall.size() < 2) {
    throw DegenerateCell("all", "fewer than 2 distinct sampled points overall");
  }
}

}  // namespace

std::vector<ConfidenceInterval> quantile_ci_batch(const SampleData& sample,
                                                  std::span<const double> p_grid, double alpha,
                                                  std::size_t bootstrap_replicates,
                                                  const DesignSpec& design, StreamKey key) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile_ci: alpha outside (0,1)");
  const WeightedEDF hajek = sample.hajek();

  std::vector<ReplicateStatistic> stats;
  std::vector<double> centers;
  for (double p : p_grid) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile_ci: p outside (0,1)");
    centers.push_back(hajek.quantile(p));
    stats.push_back([p](const ResampledSample& rs) { return rs.hajek().quantile(p); });
  }

  BootstrapConfig config;
  config.replicates = bootstrap_replicates;
  config.design = design;
  const auto dists = bootstrap_many(stats, centers, sample, config, key);

  std::vector<ConfidenceInterval> out;
  const double n = static_cast<double>(sample.size());
  for (std::size_t k = 0; k < dists.size(); ++k) {
    out.push_back(interval_from(centers[k], dists[k].s_star(), n, alpha));
  }
  return out;
}

ConfidenceInterval quantile_ci(const SampleData& sample, double p, double alpha,
                               std::size_t bootstrap_replicates, const DesignSpec& design,
                               StreamKey key) {
  return quantile_ci_batch(sample, std::span(&p, 1), alpha, bootstrap_replicates, design, key)
      .front();
}

TestResult cond_independence_test(const SampleData& sample, double alpha,
                                  std::size_t bootstrap_replicates, const DesignSpec& design,
                                  StreamKey key) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("cond_independence_test: alpha outside (0,1)");
  }
  require_usable_strata(sample);

  const auto w = sample.weights();
  const double statistic = spearman_rho_conditional(sample.y, sample.z, sample.t, w);

  const ReplicateStatistic rho_star = [](const ResampledSample& rs) {
    return spearman_rho_conditional(rs.y, rs.z, rs.t, rs.weight);
  };
  const double center = 0.0;
  BootstrapConfig config;
  config.replicates = bootstrap_replicates;
  config.design = design;
  config.scheme = PseudoScheme::kConditionalNull;
  const auto dist =
      bootstrap_many(std::span(&rho_star, 1), std::span(&center, 1), sample, config, key);

  // Null replicate statistics: the z-values are sqrt(n)-scaled, undo that.
  const double root_n = std::sqrt(static_cast<double>(sample.size()));
  std::vector<double> abs_null;
  abs_null.reserve(dist[0].z_values.size());
  for (double z : dist[0].z_values) abs_null.push_back(std::abs(z) / root_n);

  TestResult result;
  result.alpha = alpha;
  result.statistic = statistic;
  result.critical_value = resampling_quantile(abs_null, 1.0 - alpha);
  result.reject = std::abs(statistic) > result.critical_value;
  std::size_t at_least = 0;
  for (double v : abs_null) {
    if (v >= std::abs(statistic)) ++at_least;
  }
  result.p_value = static_cast<double>(at_least) / static_cast<double>(abs_null.size());
  return result;
}

std::vector<TestResult> marg_independence_test_multi(const SampleData& sample,
                                                     std::span<const double> alphas,
                                                     std::size_t bootstrap_replicates,
                                                     const DesignSpec& design, StreamKey key) {
  if (!sample.has_z()) {
    throw std::invalid_argument("marg_independence_test: sample lacks z values");
  }
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw std::invalid_argument("marg_independence_test: alpha outside (0,1)");
    }
  }

  const auto w = sample.weights();
  const auto gamma_sq = [](const ResampledSample& rs) {
    return gamma_g(rs.y, rs.z, rs.weight, [](double s) { return s * s; });
  };
  const double statistic =
      gamma_g(sample.y, sample.z, w, [](double s) { return s * s; });

  const ReplicateStatistic stat = gamma_sq;
  BootstrapConfig config;
  config.replicates = bootstrap_replicates;
  config.design = design;
  const auto dist =
      bootstrap_many(std::span(&stat, 1), std::span(&statistic, 1), sample, config, key);
  const double s_star = dist[0].s_star();
  const double n = static_cast<double>(sample.size());

  std::vector<TestResult> out;
  for (double alpha : alphas) {
    const ConfidenceInterval ci = interval_from(statistic, s_star, n, alpha);
    TestResult r;
    r.alpha = alpha;
    r.statistic = statistic;
    r.critical_value = normal_quantile(1.0 - alpha / 2.0) * s_star / std::sqrt(n);
    r.reject = 0.0 < ci.lower || 0.0 > ci.upper;
    out.push_back(r);
  }
  return out;
}

TestResult marg_independence_test(const SampleData& sample, double alpha,
                                  std::size_t bootstrap_replicates, const DesignSpec& design,
                                  StreamKey key) {
  return marg_independence_test_multi(sample, std::span(&alpha, 1), bootstrap_replicates, design,
                                      key)
      .front();
}

}  // namespace fpresample
