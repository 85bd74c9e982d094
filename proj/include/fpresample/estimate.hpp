#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fpresample/designs.hpp"
#include "fpresample/weighted_edf.hpp"

namespace fpresample {

/// Ratio-weighted distribution function estimator: mass at y_i proportional
/// to d_i/pi_i, normalized so the result is a proper d.f.
WeightedEDF hajek_df(std::span<const double> y, std::span<const double> pi,
                     const SampleIndicator& d);

/// Hajek d.f. of an already-extracted sample (weights = 1/pi).
WeightedEDF hajek_df_weighted(std::span<const double> y, std::span<const double> weight);

/// Inverse-probability estimator with fixed divisor N; total mass is
/// (1/N) sum d/pi, generally not one.
WeightedEDF ht_df(std::span<const double> y, std::span<const double> pi,
                  const SampleIndicator& d, std::size_t population);

/// Unweighted e.d.f. of the sampled values, mass 1/n each. Inconsistent
/// under informative size measures; kept as a diagnostic.
WeightedEDF naive_edf(std::span<const double> y, const SampleIndicator& d);

/// Monotone dependence measure: weighted average over sampled pairs of
/// g(|F(x_i)+G(y_i)-1|) - g(|F(x_i)-G(y_i)|) with plug-in weighted marginal
/// d.f.s evaluated at the points themselves (own mass included).
double gamma_g(std::span<const double> x, std::span<const double> y,
               std::span<const double> weight, const std::function<double(double)>& g);

/// Conditional variant: marginal d.f.s are computed within each label cell;
/// the average still runs over all sampled pairs.
double gamma_g_conditional(std::span<const double> x, std::span<const double> y,
                           std::span<const int> label, std::span<const double> weight,
                           const std::function<double(double)>& g);

/// 3 * gamma with g(s) = s^2: the weighted Spearman rank correlation.
double spearman_rho(std::span<const double> x, std::span<const double> y,
                    std::span<const double> weight);
double spearman_rho_conditional(std::span<const double> x, std::span<const double> y,
                                std::span<const int> label, std::span<const double> weight);

/// Plug-in moments feeding the covariance kernels. The size variable is
/// taken on the inclusion-probability scale (x = pi), the normalization
/// under which the kernel's corollary reductions are exact.
struct MomentSet {
  double f = 0.0;           // sampling fraction n/N
  double d = 0.0;           // mean of pi(1-pi)
  double mean_x = 0.0;      // E[X]  (= f on the pi scale)
  double mean_inv_x = 0.0;  // E[1/X]

  // Right-continuous conditional moments E[X^{\pm 1} | Y <= y] as step
  // functions over the sorted y support.
  std::vector<double> ys;
  std::vector<double> k_m1;
  std::vector<double> k_p1;

  double k_minus1(double y) const;
  double k_plus1(double y) const;
  /// mean_x * mean_inv_x / f, the design-weight dispersion ratio.
  double a_ratio() const { return mean_x * mean_inv_x / f; }

  void validate() const;
};

/// Moments over a full population with known inclusion probabilities.
MomentSet moment_set_population(std::span<const double> y, const InclusionProbs& probs);

/// Ratio-weighted plug-in moments from a sample (weights 1/pi).
MomentSet moment_set_sample(std::span<const double> y, std::span<const double> pi,
                            double sampling_fraction);

/// Sampling-randomness covariance kernel at (y,t); F evaluated externally.
double kernel_c1(const MomentSet& m, double f_y, double f_t, double f_min, double y, double t);
/// Superpopulation (Brownian bridge) kernel: F(y^t) - F(y)F(t).
double kernel_c2(double f_y, double f_t, double f_min);
/// Full kernel C = C1 + f C2.
double kernel_c(const MomentSet& m, double f_y, double f_t, double f_min, double y, double t);

double kernel_c1(const MomentSet& m, const WeightedEDF& f, double y, double t);
double kernel_c2(const WeightedEDF& f, double y, double t);
double kernel_c(const MomentSet& m, const WeightedEDF& f, double y, double t);

/// A real-valued functional of a proper distribution function.
struct Functional {
  std::string label;
  std::function<double(const WeightedEDF&)> evaluate;
};

Functional quantile_functional(double p);

/// Mean of the distribution (sum of value * mass over total mass).
Functional mean_functional();

}  // namespace fpresample
