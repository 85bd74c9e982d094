#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fpresample {

/// Step distribution function with point masses: strictly increasing
/// support values, positive masses, right-continuous evaluation. Backs the
/// ratio-weighted, inverse-probability-weighted and plain empirical
/// distribution function estimators as well as resampling distributions.
class WeightedEDF {
 public:
  WeightedEDF() = default;

  /// Sorts by value and merges coincident points (masses add).
  WeightedEDF(std::vector<double> values, std::vector<double> masses);

  /// Equal mass 1/n at each point.
  static WeightedEDF equal_mass(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double total_mass() const { return values_.empty() ? 0.0 : cum_.back(); }

  double value(std::size_t k) const { return values_[k]; }
  double mass(std::size_t k) const { return k == 0 ? cum_[0] : cum_[k] - cum_[k - 1]; }
  const std::vector<double>& values() const { return values_; }

  /// Right-continuous cumulative mass at y (unnormalized).
  double cdf(double y) const;

  /// cdf(y) / total_mass(): the proper distribution-function view.
  double cdf01(double y) const;

  /// Left-continuous inverse of cdf01: inf{ v : F(v) >= p }, p in (0,1).
  double quantile(double p) const;

  /// Rescale so total mass is one.
  WeightedEDF normalized() const;

  bool is_proper(double tol = 1e-9) const;

  /// sup_y |F(y) - G(y)| between the normalized step functions.
  double sup_distance(const WeightedEDF& other) const;

 private:
  std::vector<double> values_;  // strictly increasing
  std::vector<double> cum_;     // cumulative masses, same length
};

/// Kolmogorov distance between a normalized step function and a continuous
/// cdf, evaluated on both sides of every jump.
double kolmogorov_distance(const WeightedEDF& edf, const std::function<double(double)>& cdf);

}  // namespace fpresample
