#include "fpresample/population.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace fpresample {
namespace {

constexpr double kStratumWeights[4] = {0.4, 0.3, 0.2, 0.1};
constexpr double kStratumMeanY[4] = {800.0, 900.0, 1000.0, 1100.0};
constexpr double kStratumMeanZ[4] = {300.0, 400.0, 500.0, 600.0};

int draw_stratum(Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int j = 0; j < 4; ++j) {
    acc += kStratumWeights[j];
    if (u < acc) return j + 1;
  }
  return 4;
}

double quantile_model_y(Rng& rng) {
  const double v = std::abs(7.0 * rng.normal());
  const double eps = rng.normal();
  const double inner = 12.5 + 3.0 * std::pow(v, 1.2) + 15.0 * eps;
  return inner * inner + 4000.0;
}

// Cuadras-Auge pair with uniform marginals via the common-shock
// construction; alpha = 0 and alpha = 1 are the degenerate ends.
void marshall_olkin_pair(double alpha, Rng& rng, double& u, double& v) {
  if (alpha <= 0.0) {
    u = rng.uniform();
    v = rng.uniform();
    return;
  }
  if (alpha >= 1.0) {
    u = rng.uniform();
    v = u;
    return;
  }
  const double z1 = rng.exponential(1.0 - alpha);
  const double z2 = rng.exponential(1.0 - alpha);
  const double z12 = rng.exponential(alpha);
  u = std::exp(-std::min(z1, z12));
  v = std::exp(-std::min(z2, z12));
}

double mo_size_shape(double u) { return u * u * u / 3.0 - 0.5 * u * u + 0.10 * u + 0.5; }

double cuadras_auge_alpha(double spearman_rho) { return 4.0 * spearman_rho / (3.0 + spearman_rho); }

}  // namespace

void Population::validate() const {
  const std::size_t n = y.size();
  if (n == 0) throw std::invalid_argument("Population: empty");
  if (x.size() != n || (!z.empty() && z.size() != n) || (!t.empty() && t.size() != n)) {
    throw std::invalid_argument("Population: field length mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y[i])) throw std::invalid_argument("Population: nonfinite y");
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
      throw std::invalid_argument("Population: size variable must be positive and finite");
    }
    if (!z.empty() && !std::isfinite(z[i])) throw std::invalid_argument("Population: nonfinite z");
  }
}

void ModelSpec::validate() const {
  switch (kind) {
    case ModelKind::kQuantile:
      break;
    case ModelKind::kStratified:
      if (!(spearman_rho >= 0.0 && spearman_rho < 1.0)) {
        throw std::invalid_argument("stratified model: spearman_rho must lie in [0,1)");
      }
      break;
    case ModelKind::kMarshallOlkin:
      if (!(spearman_rho >= 0.0 && spearman_rho <= 1.0)) {
        throw std::invalid_argument("marshall-olkin model: spearman_rho must lie in [0,1]");
      }
      if (!(mo_size_log_var > 0.0)) {
        throw std::invalid_argument("marshall-olkin model: size log-variance must be positive");
      }
      break;
  }
}

Population gen_quantile_model(std::size_t n_units, Rng& rng) {
  if (n_units == 0) throw std::invalid_argument("gen_quantile_model: N must be positive");
  Population pop;
  pop.y.resize(n_units);
  pop.x.resize(n_units);
  const double w_sd = std::sqrt(0.125);
  for (std::size_t i = 0; i < n_units; ++i) {
    const double yi = quantile_model_y(rng);
    const double w = std::exp(w_sd * rng.normal());
    pop.y[i] = yi;
    pop.x[i] = std::pow(yi, 0.2) * w;
  }
  return pop;
}

Population gen_stratified_model(std::size_t n_units, double spearman_rho, Rng& rng) {
  if (n_units == 0) throw std::invalid_argument("gen_stratified_model: N must be positive");
  if (!(spearman_rho >= 0.0 && spearman_rho < 1.0)) {
    throw std::invalid_argument("gen_stratified_model: spearman_rho must lie in [0,1)");
  }
  // Pearson correlation that yields Spearman rho for a bivariate normal.
  const double r = 2.0 * std::sin(std::numbers::pi * spearman_rho / 6.0);
  const double r_ortho = std::sqrt(1.0 - r * r);
  Population pop;
  pop.y.resize(n_units);
  pop.z.resize(n_units);
  pop.x.resize(n_units);
  pop.t.resize(n_units);
  for (std::size_t i = 0; i < n_units; ++i) {
    const int stratum = draw_stratum(rng);
    const double g1 = rng.normal();
    const double g2 = rng.normal();
    pop.t[i] = stratum;
    pop.y[i] = kStratumMeanY[stratum - 1] + 150.0 * g1;
    pop.z[i] = kStratumMeanZ[stratum - 1] + 60.0 * (r * g1 + r_ortho * g2);
    pop.x[i] = static_cast<double>(stratum);
  }
  return pop;
}

Population gen_marshall_olkin_model(std::size_t n_units, double spearman_rho,
                                    double size_log_var, Rng& rng) {
  if (n_units == 0) throw std::invalid_argument("gen_marshall_olkin_model: N must be positive");
  if (!(spearman_rho >= 0.0 && spearman_rho <= 1.0)) {
    throw std::invalid_argument("gen_marshall_olkin_model: spearman_rho must lie in [0,1]");
  }
  if (!(size_log_var > 0.0)) {
    throw std::invalid_argument("gen_marshall_olkin_model: size log-variance must be positive");
  }
  const double alpha = cuadras_auge_alpha(spearman_rho);
  const double w_sd = std::sqrt(size_log_var);
  Population pop;
  pop.y.resize(n_units);
  pop.z.resize(n_units);
  pop.x.resize(n_units);
  for (std::size_t i = 0; i < n_units; ++i) {
    double u, v;
    marshall_olkin_pair(alpha, rng, u, v);
    const double w = std::exp(w_sd * rng.normal());
    pop.y[i] = u;
    pop.z[i] = v;
    pop.x[i] = mo_size_shape(u + v) * w;
  }
  return pop;
}

Population generate(const ModelSpec& spec, std::size_t n_units, Rng& rng) {
  spec.validate();
  switch (spec.kind) {
    case ModelKind::kQuantile:
      return gen_quantile_model(n_units, rng);
    case ModelKind::kStratified:
      return gen_stratified_model(n_units, spec.spearman_rho, rng);
    case ModelKind::kMarshallOlkin:
      return gen_marshall_olkin_model(n_units, spec.spearman_rho, spec.mo_size_log_var, rng);
  }
  throw std::invalid_argument("generate: unknown model kind");
}

double draw_study_value(const ModelSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case ModelKind::kQuantile:
      return quantile_model_y(rng);
    case ModelKind::kStratified: {
      const int stratum = draw_stratum(rng);
      return kStratumMeanY[stratum - 1] + 150.0 * rng.normal();
    }
    case ModelKind::kMarshallOlkin: {
      double u, v;
      marshall_olkin_pair(cuadras_auge_alpha(spec.spearman_rho), rng, u, v);
      return u;
    }
  }
  throw std::invalid_argument("draw_study_value: unknown model kind");
}

double empirical_quantile(const std::function<double(Rng&)>& draw, double p, std::size_t sims,
                          Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("empirical_quantile: p outside (0,1)");
  if (sims == 0) throw std::invalid_argument("empirical_quantile: sims must be positive");
  std::vector<double> values(sims);
  for (double& v : values) v = draw(rng);
  // Left-continuous inverse: the ceil(p*sims)-th order statistic.
  const std::size_t k =
      static_cast<std::size_t>(std::ceil(p * static_cast<double>(sims))) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

double true_quantile_oracle(const ModelSpec& spec, double p, std::size_t sims, Rng& rng) {
  if (sims < 10000) throw std::invalid_argument("true_quantile_oracle: sims must be >= 10^4");
  spec.validate();
  return empirical_quantile([&spec](Rng& r) { return draw_study_value(spec, r); }, p, sims, rng);
}

}  // namespace fpresample
