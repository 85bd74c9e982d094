#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpresample/rng.hpp"

namespace fpresample {

/// First-order inclusion probabilities of a fixed-size design.
/// Invariants: every pi in (0,1], sum(pi) == sample_size (1e-9 relative).
struct InclusionProbs {
  std::vector<double> pi;
  std::size_t sample_size = 0;

  std::size_t population_size() const { return pi.size(); }
  double sampling_fraction() const {
    return static_cast<double>(sample_size) / static_cast<double>(pi.size());
  }
  void validate() const;
};

/// pi_i = n x_i / sum(x), with iterative clamping: probabilities above one
/// are pinned to one and the remaining target size is re-spread over the
/// unclamped units until all pi <= 1 and sum(pi) = n.
InclusionProbs inclusion_probs(std::span<const double> x, std::size_t n);

struct DesignSpec;

/// Inclusion probabilities a design actually realizes over a frame with
/// size variable x: size-proportional for the unequal-probability designs,
/// constant n/N for simple random sampling.
InclusionProbs design_inclusion_probs(const DesignSpec& spec, std::span<const double> x,
                                      std::size_t n);

enum class DesignKind { kSrs, kPoisson, kConditionalPoisson, kPareto };

struct DesignSpec {
  DesignKind kind = DesignKind::kPareto;
  bool fixed_size() const { return kind != DesignKind::kPoisson; }
};

DesignKind design_kind_from_string(const std::string& name);
std::string to_string(DesignKind kind);

/// Realized draw: d[i] = 1 iff unit i is sampled.
using SampleIndicator = std::vector<std::uint8_t>;

std::size_t sample_count(const SampleIndicator& d);

/// Uniform over all size-n subsets.
SampleIndicator draw_srs(std::size_t population, std::size_t n, Rng& rng);

/// Independent Bernoulli(pi_i); variable realized size.
SampleIndicator draw_poisson(const InclusionProbs& probs, Rng& rng);

/// Rosen order sampling: q_i = u_i(1-pi_i) / ((1-u_i)pi_i), the n smallest
/// q win; ties broken by unit index. Units with pi_i = 1 are force-included
/// before ranking.
SampleIndicator draw_pareto(const InclusionProbs& probs, Rng& rng);

/// pmf of the sum of independent Bernoulli(p_i), k = 0..k_max.
std::vector<double> poisson_binomial_pmf(std::span<const double> probs, std::size_t k_max);

/// Exact first-order inclusion probabilities of Poisson sampling with
/// working probabilities `probs` conditioned on total size n:
/// pi_i = p_i P_{-i}(n-1) / P(n), with the leave-one-out pmf obtained by
/// two-sided deconvolution (upward for p <= 1/2, downward otherwise), which
/// keeps every step a contraction.
std::vector<double> conditional_poisson_inclusion(std::span<const double> probs, std::size_t n);

/// Poisson sampling conditioned on a fixed sample size, with working
/// parameters calibrated so the realized first-order inclusion
/// probabilities match the targets.
class ConditionalPoissonSampler {
 public:
  /// Calibrates on construction (damped fixed point on log-odds, max
  /// error < tol). Throws NumericFailure with diagnostics on divergence.
  explicit ConditionalPoissonSampler(const InclusionProbs& target, double tol = 1e-6,
                                     int max_iterations = 200);

  /// Rejection draw from the calibrated Poisson measure conditioned on the
  /// target size; aborts with NumericFailure after 10^6 rejections.
  SampleIndicator draw(Rng& rng) const;

  /// Working Bernoulli parameters (clamped units carry 1).
  const std::vector<double>& working_probs() const { return working_probs_; }
  /// Exact inclusion probabilities achieved by the calibrated design.
  const std::vector<double>& achieved_inclusion() const { return achieved_; }
  int iterations() const { return iterations_; }

 private:
  std::vector<double> working_probs_;
  std::vector<double> achieved_;
  std::vector<std::size_t> free_units_;  // indices with pi < 1
  std::size_t target_size_ = 0;
  std::size_t free_size_ = 0;  // draws needed among free units
  int iterations_ = 0;
};

SampleIndicator draw_conditional_poisson(const InclusionProbs& probs, Rng& rng);

/// Dispatch on the design kind.
SampleIndicator draw_design(const DesignSpec& spec, const InclusionProbs& probs, Rng& rng);

/// Exact distribution of a design over all subsets of a tiny population
/// (N <= 12), as bitmask -> probability.
struct DesignDistribution {
  std::size_t population = 0;
  std::vector<std::pair<std::uint32_t, double>> mass;  // nonzero entries, sorted by mask

  double entropy() const;
  /// P(i in S).
  std::vector<double> inclusion() const;
};

DesignDistribution enumerate_design(const DesignSpec& spec, const InclusionProbs& probs);

/// sum over subsets of (sqrt(P) - sqrt(R))^2.
double hellinger_distance(const DesignDistribution& p, const DesignDistribution& r);

}  // namespace fpresample
