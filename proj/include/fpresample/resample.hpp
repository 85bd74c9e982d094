#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fpresample/designs.hpp"
#include "fpresample/estimate.hpp"
#include "fpresample/population.hpp"
#include "fpresample/rng.hpp"
#include "fpresample/weighted_edf.hpp"

namespace fpresample {

/// The rows of a drawn sample together with the frame size they came from.
struct SampleData {
  std::vector<double> y;
  std::vector<double> z;  // optional second study variable
  std::vector<double> x;  // size variable
  std::vector<double> pi;
  std::vector<int> t;  // optional stratum labels
  std::size_t population_size = 0;

  std::size_t size() const { return y.size(); }
  bool has_z() const { return !z.empty(); }
  bool has_t() const { return !t.empty(); }
  std::vector<double> weights() const;  // 1/pi
  WeightedEDF hajek() const;
};

SampleData extract_sample(const Population& pop, const InclusionProbs& probs,
                          const SampleIndicator& d);

/// A predicted population of pseudo-units carrying sample values.
struct PseudoPopulation {
  std::vector<double> y;
  std::vector<double> z;  // present when the sample carries z
  std::vector<double> x;
  std::vector<int> t;  // present when the sample carries t
  /// Replication counts per sample row; empty for generation schemes that
  /// do not replicate whole rows (the conditional-null scheme).
  std::vector<std::uint32_t> counts;

  std::size_t size() const { return y.size(); }
};

/// Phase 1: N independent draws from the ratio-weighted sample distribution
/// (row i selected with probability proportional to 1/pi_i); the drawn row's
/// values are copied whole, so the counts are multinomial.
PseudoPopulation phase1_pseudo_population(const SampleData& sample, std::size_t population,
                                          Rng& rng);

/// Conditional-independence null variant: stratum labels are drawn first
/// (whole-sample 1/pi weights), then the two study values are drawn
/// independently within the label's cell. The pseudo size variable is the
/// stratum label itself.
PseudoPopulation h0_pseudo_population(const SampleData& sample, std::size_t population, Rng& rng);

/// Holmberg-style counts floor(1/pi) + Bernoulli(frac(1/pi)); the total is
/// random. Kept as a negative control.
PseudoPopulation holmberg_pseudo_population(const SampleData& sample, Rng& rng);

/// Phase 2: size-n redraw from the pseudo-population with pi* proportional
/// to the pseudo size variable.
struct Phase2Draw {
  SampleIndicator d;
  InclusionProbs pi_star;
};

Phase2Draw phase2_redraw(const PseudoPopulation& pp, std::size_t n, const DesignSpec& design,
                         Rng& rng);

/// The rows selected by a phase-2 draw, with their resampling weights.
struct ResampledSample {
  std::vector<double> y;
  std::vector<double> z;
  std::vector<int> t;
  std::vector<double> weight;  // 1/pi*

  WeightedEDF hajek() const;
};

ResampledSample gather_resampled(const PseudoPopulation& pp, const Phase2Draw& draw);

/// Ratio-weighted d.f. of a phase-2 redraw.
WeightedEDF resampled_hajek(const PseudoPopulation& pp, const Phase2Draw& draw);

/// Replicate statistics and their centered, root-n-scaled values.
struct ResamplingDistribution {
  std::vector<double> z_values;  // sqrt(n) (theta*_m - center), failures skipped
  std::size_t failed = 0;

  double s2_star() const;         // sample variance of z_values
  double s_star() const;          // its square root
  WeightedEDF edf() const;        // 1/M mass per replicate value
  std::size_t replicates() const { return z_values.size(); }
};

/// Statistic evaluated on one resampled weighted sample.
using ReplicateStatistic = std::function<double(const ResampledSample&)>;

enum class PseudoScheme { kTwoPhase, kConditionalNull };

struct BootstrapConfig {
  std::size_t replicates = 0;
  DesignSpec design{DesignKind::kPareto};
  PseudoScheme scheme = PseudoScheme::kTwoPhase;
  /// Replicates whose statistic evaluation throws are marked failed; the
  /// run aborts when the failed fraction exceeds this threshold.
  double max_failure_rate = 0.01;
};

/// Shared-replicate bootstrap: every statistic is evaluated on the same
/// M pseudo-population redraws. Streams are keyed by replicate index so the
/// result does not depend on evaluation order.
std::vector<ResamplingDistribution> bootstrap_many(std::span<const ReplicateStatistic> statistics,
                                                   std::span<const double> centers,
                                                   const SampleData& sample,
                                                   const BootstrapConfig& config, StreamKey key);

/// Single-functional form: theta is applied to the replicate ratio-weighted
/// d.f.s and centered at theta of the original-sample d.f.
ResamplingDistribution bootstrap(const Functional& theta, const SampleData& sample,
                                 std::size_t bootstrap_replicates, const DesignSpec& design,
                                 StreamKey key);

/// Classical with-replacement resampling from the ratio-weighted sample
/// distribution (negative control): M replicates of n i.i.d. draws, each
/// statistic evaluated on the plain equal-weight e.d.f.
std::vector<ResamplingDistribution> efron_resample_many(
    std::span<const ReplicateStatistic> statistics, std::span<const double> centers,
    const SampleData& sample, std::size_t replicates, StreamKey key);

ResamplingDistribution efron_resample(const Functional& theta, const SampleData& sample,
                                      std::size_t replicates, StreamKey key);

}  // namespace fpresample
