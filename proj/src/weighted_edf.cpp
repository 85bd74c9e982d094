#include "fpresample/weighted_edf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fpresample {

WeightedEDF::WeightedEDF(std::vector<double> values, std::vector<double> masses) {
  if (values.size() != masses.size()) {
    throw std::invalid_argument("WeightedEDF: values/masses length mismatch");
  }
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  values_.reserve(n);
  cum_.reserve(n);
  double running = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = values[order[k]];
    const double m = masses[order[k]];
    if (!std::isfinite(v) || !(m > 0.0)) {
      throw std::invalid_argument("WeightedEDF: nonfinite value or nonpositive mass");
    }
    running += m;
    if (!values_.empty() && values_.back() == v) {
      cum_.back() = running;  // merge tied value
    } else {
      values_.push_back(v);
      cum_.push_back(running);
    }
  }
}

WeightedEDF WeightedEDF::equal_mass(std::vector<double> values) {
  const double m = 1.0 / static_cast<double>(values.size());
  std::vector<double> masses(values.size(), m);
  return WeightedEDF(std::move(values), std::move(masses));
}

double WeightedEDF::cdf(double y) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), y);
  if (it == values_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double WeightedEDF::cdf01(double y) const {
  const double t = total_mass();
  return t > 0.0 ? cdf(y) / t : 0.0;
}

double WeightedEDF::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile: p must lie in (0,1)");
  }
  if (values_.empty()) throw std::invalid_argument("quantile: empty distribution");
  const double target = p * total_mass();
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
  const std::size_t k = it == cum_.end() ? values_.size() - 1
                                         : static_cast<std::size_t>(it - cum_.begin());
  return values_[k];
}

WeightedEDF WeightedEDF::normalized() const {
  WeightedEDF out = *this;
  const double t = total_mass();
  if (t <= 0.0) throw std::invalid_argument("normalized: zero total mass");
  for (double& c : out.cum_) c /= t;
  return out;
}

bool WeightedEDF::is_proper(double tol) const {
  return !values_.empty() && std::abs(total_mass() - 1.0) <= tol;
}

double WeightedEDF::sup_distance(const WeightedEDF& other) const {
  // Step functions change only at their own jump points.
  double sup = 0.0;
  for (double v : values_) sup = std::max(sup, std::abs(cdf01(v) - other.cdf01(v)));
  for (double v : other.values_) sup = std::max(sup, std::abs(cdf01(v) - other.cdf01(v)));
  return sup;
}

double kolmogorov_distance(const WeightedEDF& edf, const std::function<double(double)>& cdf) {
  double sup = 0.0;
  double below = 0.0;
  const double total = edf.total_mass();
  for (std::size_t k = 0; k < edf.size(); ++k) {
    const double v = edf.value(k);
    const double at = cdf(v);
    const double here = edf.cdf(v) / total;
    sup = std::max(sup, std::max(std::abs(here - at), std::abs(below - at)));
    below = here;
  }
  return sup;
}

}  // namespace fpresample
