#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fpresample/rng.hpp"

namespace fpresample {

/// A generated finite population. y is the study variable, z an optional
/// second study variable, x the (strictly positive) size variable driving
/// inclusion probabilities, t optional discrete stratum labels.
struct Population {
  std::vector<double> y;
  std::vector<double> z;  // empty when absent
  std::vector<double> x;
  std::vector<int> t;  // empty when absent

  std::size_t size() const { return y.size(); }
  bool has_z() const { return !z.empty(); }
  bool has_t() const { return !t.empty(); }

  /// Enforces equal lengths, positive finite x, no NaN anywhere.
  void validate() const;
};

enum class ModelKind {
  kQuantile,       // skewed squared-regression scenario for quantile intervals
  kStratified,     // four-stratum bivariate Gaussian with tunable rank correlation
  kMarshallOlkin,  // one-parameter Marshall-Olkin (Cuadras-Auge) copula pair
};

struct ModelSpec {
  ModelKind kind = ModelKind::kQuantile;
  /// Target Spearman correlation of the dependence models.
  double spearman_rho = 0.0;
  /// Log-scale variance of the multiplicative lognormal noise on the
  /// Marshall-Olkin size variable.
  double mo_size_log_var = 0.4;

  void validate() const;
};

/// y = (12.5 + 3 V^1.2 + 15 eps)^2 + 4000 with V half-normal(scale 7),
/// eps standard normal; size variable x = y^0.2 * W, W lognormal(0, 0.125).
Population gen_quantile_model(std::size_t n_units, Rng& rng);

/// Strata {1,2,3,4} with weights (0.4,0.3,0.2,0.1); (y,z) bivariate normal
/// around stratum means with correlation 2*sin(pi*rho/6), which makes the
/// within-stratum Spearman coefficient exactly rho. Size variable x = t.
Population gen_stratified_model(std::size_t n_units, double spearman_rho, Rng& rng);

/// (y,z) uniform marginals coupled by the Cuadras-Auge copula
/// C(u,v) = min(u,v)^alpha (uv)^(1-alpha) with alpha = 4 rho/(3+rho), so the
/// Spearman coefficient is exactly rho. Size variable x = s(y+z) * W with
/// s(u) = u^3/3 - 0.5 u^2 + 0.10 u + 0.5 and W lognormal(0, mo_size_log_var).
Population gen_marshall_olkin_model(std::size_t n_units, double spearman_rho,
                                    double size_log_var, Rng& rng);

Population generate(const ModelSpec& spec, std::size_t n_units, Rng& rng);

/// One study-variable draw from the model; shared by the generators and the
/// quantile oracle so both see the same distribution.
double draw_study_value(const ModelSpec& spec, Rng& rng);

/// Empirical p-quantile of `sims` independent draws of any sampler.
double empirical_quantile(const std::function<double(Rng&)>& draw, double p, std::size_t sims,
                          Rng& rng);

/// Ground-truth quantile of the model's study variable by brute simulation
/// (pre: sims >= 10000).
double true_quantile_oracle(const ModelSpec& spec, double p, std::size_t sims, Rng& rng);

}  // namespace fpresample
