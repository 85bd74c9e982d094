#include "fpresample/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>

#include "fpresample/errors.hpp"
#include "fpresample/kernels.hpp"

namespace fpresample {
namespace {

void gather_sampled(std::span<const double> y, std::span<const double> pi,
                    const SampleIndicator& d, std::vector<double>& values,
                    std::vector<double>& weights) {
  const std::size_t population = y.size();
  if (pi.size() != population || d.size() != population) {
    throw std::invalid_argument("sample gather: length mismatch");
  }
  values.clear();
  weights.clear();
  for (std::size_t i = 0; i < population; ++i) {
    if (d[i]) {
      values.push_back(y[i]);
      weights.push_back(1.0 / pi[i]);
    }
  }
}

/// F evaluated at each data point with the midpoint (midrank) convention:
/// mass strictly below plus half the point's own tie block. Keeps the
/// dependence terms exactly centered under independence, with or without
/// tied values — resampled data are heavily tied, so this matters.
std::vector<double> inplace_cdf_values(std::span<const double> v, std::span<const double> w,
                                       const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> order(idx);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  double total = 0.0;
  for (std::size_t i : idx) total += w[i];

  std::vector<double> out(v.size());  // only positions in idx are meaningful
  double below = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t j = k;
    double block = 0.0;
    while (j < order.size() && v[order[j]] == v[order[k]]) {
      block += w[order[j]];
      ++j;
    }
    const double mid = (below + 0.5 * block) / total;
    for (std::size_t q = k; q < j; ++q) out[order[q]] = mid;
    below += block;
    k = j;
  }
  return out;
}

double gamma_from_cdf_values(const std::vector<double>& fx, const std::vector<double>& gy,
                             std::span<const double> weight,
                             const std::function<double(double)>& g) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const double concordant = std::abs(fx[i] + gy[i] - 1.0);
    const double discordant = std::abs(fx[i] - gy[i]);
    num += weight[i] * (g(concordant) - g(discordant));
    den += weight[i];
  }
  return num / den;
}

const std::function<double(double)>& square_fn() {
  static const std::function<double(double)> g = [](double s) { return s * s; };
  return g;
}

}  // namespace

WeightedEDF hajek_df(std::span<const double> y, std::span<const double> pi,
                     const SampleIndicator& d) {
  std::vector<double> values, weights;
  gather_sampled(y, pi, d, values, weights);
  if (values.empty()) throw std::invalid_argument("hajek_df: empty sample");
  return WeightedEDF(std::move(values), std::move(weights)).normalized();
}

WeightedEDF hajek_df_weighted(std::span<const double> y, std::span<const double> weight) {
  if (y.empty()) throw std::invalid_argument("hajek_df_weighted: empty sample");
  return WeightedEDF(std::vector<double>(y.begin(), y.end()),
                     std::vector<double>(weight.begin(), weight.end()))
      .normalized();
}

WeightedEDF ht_df(std::span<const double> y, std::span<const double> pi,
                  const SampleIndicator& d, std::size_t population) {
  std::vector<double> values, weights;
  gather_sampled(y, pi, d, values, weights);
  if (values.empty()) throw std::invalid_argument("ht_df: empty sample");
  const double inv_n = 1.0 / static_cast<double>(population);
  for (double& w : weights) w *= inv_n;
  return WeightedEDF(std::move(values), std::move(weights));
}

WeightedEDF naive_edf(std::span<const double> y, const SampleIndicator& d) {
  std::vector<double> values;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (d[i]) values.push_back(y[i]);
  }
  if (values.empty()) throw std::invalid_argument("naive_edf: empty sample");
  return WeightedEDF::equal_mass(std::move(values));
}

double gamma_g(std::span<const double> x, std::span<const double> y,
               std::span<const double> weight, const std::function<double(double)>& g) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("gamma_g: empty sample");
  if (y.size() != n || weight.size() != n) throw std::invalid_argument("gamma_g: length mismatch");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto fx = inplace_cdf_values(x, weight, all);
  const auto gy = inplace_cdf_values(y, weight, all);
  return gamma_from_cdf_values(fx, gy, weight, g);
}

double gamma_g_conditional(std::span<const double> x, std::span<const double> y,
                           std::span<const int> label, std::span<const double> weight,
                           const std::function<double(double)>& g) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("gamma_g_conditional: empty sample");
  if (y.size() != n || label.size() != n || weight.size() != n) {
    throw std::invalid_argument("gamma_g_conditional: length mismatch");
  }
  std::map<int, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i) cells[label[i]].push_back(i);

  std::vector<double> fx(n), gy(n);
  for (const auto& [cell, idx] : cells) {
    if (idx.empty()) throw DegenerateCell(std::to_string(cell), "no sampled units");
    const auto f_cell = inplace_cdf_values(x, weight, idx);
    const auto g_cell = inplace_cdf_values(y, weight, idx);
    for (std::size_t i : idx) {
      fx[i] = f_cell[i];
      gy[i] = g_cell[i];
    }
  }
  return gamma_from_cdf_values(fx, gy, weight, g);
}

double spearman_rho(std::span<const double> x, std::span<const double> y,
                    std::span<const double> weight) {
  return 3.0 * gamma_g(x, y, weight, square_fn());
}

double spearman_rho_conditional(std::span<const double> x, std::span<const double> y,
                                std::span<const int> label, std::span<const double> weight) {
  return 3.0 * gamma_g_conditional(x, y, label, weight, square_fn());
}

double MomentSet::k_minus1(double y) const {
  const auto it = std::upper_bound(ys.begin(), ys.end(), y);
  if (it == ys.begin()) return k_m1.front();  // below the data range
  return k_m1[static_cast<std::size_t>(it - ys.begin()) - 1];
}

double MomentSet::k_plus1(double y) const {
  const auto it = std::upper_bound(ys.begin(), ys.end(), y);
  if (it == ys.begin()) return k_p1.front();
  return k_p1[static_cast<std::size_t>(it - ys.begin()) - 1];
}

void MomentSet::validate() const {
  if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("MomentSet: f outside (0,1)");
  if (!(d > 0.0)) throw std::invalid_argument("MomentSet: d must be positive");
  if (mean_x * mean_inv_x < 1.0 - 1e-12) {
    throw std::invalid_argument("MomentSet: E[X]E[1/X] below one");
  }
  if (ys.empty()) throw std::invalid_argument("MomentSet: empty conditional moments");
}

namespace {

MomentSet build_moments(std::span<const double> y, std::span<const double> x,
                        std::span<const double> weight, double f) {
  const std::size_t n = y.size();
  MomentSet m;
  m.f = f;

  const auto& ops = kern::active_ops();
  const double wsum = ops.sum(weight.data(), n);

  std::vector<double> inv_x(n), x_one_minus_x(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_x[i] = 1.0 / x[i];
    x_one_minus_x[i] = x[i] * (1.0 - x[i]);
  }
  m.mean_x = ops.dot(weight.data(), x.data(), n) / wsum;
  m.mean_inv_x = ops.dot(weight.data(), inv_x.data(), n) / wsum;
  m.d = ops.dot(weight.data(), x_one_minus_x.data(), n) / wsum;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  double cw = 0.0, cwx = 0.0, cwinv = 0.0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t j = k;
    while (j < n && y[order[j]] == y[order[k]]) {
      const std::size_t i = order[j];
      cw += weight[i];
      cwx += weight[i] * x[i];
      cwinv += weight[i] * inv_x[i];
      ++j;
    }
    m.ys.push_back(y[order[k]]);
    m.k_p1.push_back(cwx / cw);
    m.k_m1.push_back(cwinv / cw);
    k = j;
  }
  return m;
}

}  // namespace

MomentSet moment_set_population(std::span<const double> y, const InclusionProbs& probs) {
  const std::size_t population = y.size();
  if (probs.population_size() != population) {
    throw std::invalid_argument("moment_set_population: length mismatch");
  }
  std::vector<double> unit(population, 1.0);
  return build_moments(y, probs.pi, unit, probs.sampling_fraction());
}

MomentSet moment_set_sample(std::span<const double> y, std::span<const double> pi,
                            double sampling_fraction) {
  const std::size_t n = y.size();
  if (pi.size() != n || n == 0) throw std::invalid_argument("moment_set_sample: bad sample");
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = 1.0 / pi[i];
  return build_moments(y, pi, weight, sampling_fraction);
}

double kernel_c1(const MomentSet& m, double f_y, double f_t, double f_min, double y, double t) {
  if (!(m.d > 0.0)) throw NumericFailure("kernel_c1: singular kernel (d = 0)");
  const double ex = m.mean_x;
  const double f = m.f;
  // Kernel values are only defined over the observed data range.
  const double lo = m.ys.front();
  const double yc = std::max(y, lo);
  const double tc = std::max(t, lo);
  const double km_min = m.k_minus1(std::min(yc, tc));
  const double term1 = f * ((ex / f) * km_min - 1.0) * f_min;
  const double term2 = (f * f * f / m.d) * (1.0 - m.k_plus1(yc) / ex) *
                       (1.0 - m.k_plus1(tc) / ex) * f_y * f_t;
  const double term3 =
      f * ((ex / f) * (m.k_minus1(yc) + m.k_minus1(tc) - m.mean_inv_x - 1.0)) * f_y * f_t;
  return term1 - term2 - term3;
}

double kernel_c2(double f_y, double f_t, double f_min) { return f_min - f_y * f_t; }

double kernel_c(const MomentSet& m, double f_y, double f_t, double f_min, double y, double t) {
  return kernel_c1(m, f_y, f_t, f_min, y, t) + m.f * kernel_c2(f_y, f_t, f_min);
}

double kernel_c1(const MomentSet& m, const WeightedEDF& f, double y, double t) {
  return kernel_c1(m, f.cdf01(y), f.cdf01(t), f.cdf01(std::min(y, t)), y, t);
}

double kernel_c2(const WeightedEDF& f, double y, double t) {
  return kernel_c2(f.cdf01(y), f.cdf01(t), f.cdf01(std::min(y, t)));
}

double kernel_c(const MomentSet& m, const WeightedEDF& f, double y, double t) {
  return kernel_c(m, f.cdf01(y), f.cdf01(t), f.cdf01(std::min(y, t)), y, t);
}

Functional quantile_functional(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile_functional: p outside (0,1)");
  char label[32];
  std::snprintf(label, sizeof label, "quantile(%g)", p);
  return Functional{label, [p](const WeightedEDF& f) { return f.quantile(p); }};
}

Functional mean_functional() {
  return Functional{"mean", [](const WeightedEDF& f) {
                      double acc = 0.0;
                      for (std::size_t k = 0; k < f.size(); ++k) acc += f.value(k) * f.mass(k);
                      return acc / f.total_mass();
                    }};
}

}  // namespace fpresample
