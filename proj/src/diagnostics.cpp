#include "fpresample/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "fpresample/estimate.hpp"
#include "fpresample/harness.hpp"
#include "fpresample/parallel.hpp"
#include "fpresample/resample.hpp"

namespace fpresample {

KernelCheckResult run_kernel_check(const KernelCheckSettings& settings) {
  settings.model.validate();
  const StreamKey master{settings.seed};
  const std::size_t n = settings.sample_size;
  const std::size_t big_n = settings.population_size;
  const double root_n = std::sqrt(static_cast<double>(n));

  // Reference population: carries the model d.f. and the kernel moments.
  Rng ref_rng = master.child(0).rng();
  const Population ref = generate(settings.model, settings.reference_size, ref_rng);
  const InclusionProbs ref_probs = design_inclusion_probs(
      settings.design, ref.x,
      static_cast<std::size_t>(std::llround(static_cast<double>(settings.reference_size) *
                                            static_cast<double>(n) /
                                            static_cast<double>(big_n))));
  const MomentSet moments = moment_set_population(ref.y, ref_probs);
  const WeightedEDF ref_df = WeightedEDF::equal_mass(ref.y);

  KernelCheckResult result;
  for (double level : settings.grid_levels) result.grid.push_back(ref_df.quantile(level));
  const std::size_t g = result.grid.size();

  std::vector<double> f_ref(g);
  for (std::size_t k = 0; k < g; ++k) f_ref[k] = ref_df.cdf01(result.grid[k]);

  // Per-replicate deviations sqrt(n) (F_hat(y_k) - F(y_k)).
  std::vector<std::vector<double>> devs(settings.replicates, std::vector<double>(g));
  parallel_for(settings.replicates, resolve_threads(settings.threads), [&](std::size_t r) {
    const StreamKey rep = master.child(1).child(r);
    Rng pop_rng = rep.child(0).rng();
    const Population pop = generate(settings.model, big_n, pop_rng);
    const InclusionProbs probs = design_inclusion_probs(settings.design, pop.x, n);
    Rng draw_rng = rep.child(1).rng();
    const SampleIndicator d = draw_design(settings.design, probs, draw_rng);
    const WeightedEDF hajek = hajek_df(pop.y, probs.pi, d);
    for (std::size_t k = 0; k < g; ++k) {
      devs[r][k] = root_n * (hajek.cdf01(result.grid[k]) - f_ref[k]);
    }
  });

  std::vector<double> mean(g, 0.0);
  for (const auto& row : devs) {
    for (std::size_t k = 0; k < g; ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= static_cast<double>(settings.replicates);

  result.max_rel_dev = 0.0;
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t b = a; b < g; ++b) {
      double cov = 0.0;
      for (const auto& row : devs) cov += (row[a] - mean[a]) * (row[b] - mean[b]);
      cov /= static_cast<double>(settings.replicates - 1);
      const double y = result.grid[a];
      const double t = result.grid[b];
      const double analytic =
          kernel_c(moments, f_ref[a], f_ref[b], ref_df.cdf01(std::min(y, t)), y, t);
      result.cells.push_back({y, t, cov, analytic});
      result.max_rel_dev =
          std::max(result.max_rel_dev, std::abs(cov - analytic) / std::abs(analytic));
    }
  }
  return result;
}

void KernelCheckResult::write_csv(std::ostream& out) const {
  out << "y,t,mc_cov,kernel,rel_dev\n";
  for (const auto& c : cells) {
    out << format_double(c.y) << "," << format_double(c.t) << "," << format_double(c.mc_cov)
        << "," << format_double(c.kernel) << ","
        << format_double(std::abs(c.mc_cov - c.kernel) / std::abs(c.kernel)) << "\n";
  }
  out << "max_rel_dev," << format_double(max_rel_dev) << ",,,\n";
}

void KernelCheckResult::write_json(std::ostream& out) const {
  nlohmann::json j;
  j["max_rel_dev"] = max_rel_dev;
  auto& cells_json = j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    cells_json.push_back({{"y", c.y}, {"t", c.t}, {"mc_cov", c.mc_cov}, {"kernel", c.kernel}});
  }
  out << j.dump(2) << "\n";
}

DesignCheckResult run_design_check(const DesignCheckSettings& settings) {
  const std::size_t big_n = settings.population_size;
  std::vector<double> x(big_n);
  for (std::size_t i = 0; i < big_n; ++i) {
    x[i] = 1.0 + settings.size_spread * static_cast<double>(i) /
                     static_cast<double>(big_n > 1 ? big_n - 1 : 1);
  }
  const InclusionProbs probs = design_inclusion_probs(settings.design, x, settings.sample_size);

  DesignCheckResult result;
  result.target_pi = probs.pi;
  result.empirical_pi.assign(big_n, 0.0);

  Rng rng = StreamKey{settings.seed}.rng();
  if (settings.design.kind == DesignKind::kConditionalPoisson) {
    const ConditionalPoissonSampler sampler(probs);
    for (std::size_t i = 0; i < big_n; ++i) {
      result.calibration_dev =
          std::max(result.calibration_dev, std::abs(sampler.achieved_inclusion()[i] - probs.pi[i]));
    }
    for (std::size_t r = 0; r < settings.draws; ++r) {
      const SampleIndicator d = sampler.draw(rng);
      for (std::size_t i = 0; i < big_n; ++i) result.empirical_pi[i] += d[i];
    }
  } else {
    for (std::size_t r = 0; r < settings.draws; ++r) {
      const SampleIndicator d = draw_design(settings.design, probs, rng);
      for (std::size_t i = 0; i < big_n; ++i) result.empirical_pi[i] += d[i];
    }
  }
  for (std::size_t i = 0; i < big_n; ++i) {
    result.empirical_pi[i] /= static_cast<double>(settings.draws);
    result.max_inclusion_dev =
        std::max(result.max_inclusion_dev, std::abs(result.empirical_pi[i] - probs.pi[i]));
  }

  if (big_n <= 12 && settings.design.kind != DesignKind::kPoisson) {
    const DesignDistribution dist = enumerate_design(settings.design, probs);
    result.enumerated = true;
    result.entropy = dist.entropy();
    const DesignDistribution rejective =
        enumerate_design(DesignSpec{DesignKind::kConditionalPoisson}, probs);
    result.hellinger_vs_rejective = hellinger_distance(dist, rejective);
  }
  return result;
}

void DesignCheckResult::write_csv(std::ostream& out) const {
  out << "unit,target_pi,empirical_pi\n";
  for (std::size_t i = 0; i < target_pi.size(); ++i) {
    out << i << "," << format_double(target_pi[i]) << "," << format_double(empirical_pi[i])
        << "\n";
  }
  out << "max_inclusion_dev," << format_double(max_inclusion_dev) << ",\n";
  out << "calibration_dev," << format_double(calibration_dev) << ",\n";
  if (enumerated) {
    out << "entropy," << format_double(entropy) << ",\n";
    out << "hellinger_vs_rejective," << format_double(hellinger_vs_rejective) << ",\n";
  }
}

void DesignCheckResult::write_json(std::ostream& out) const {
  nlohmann::json j;
  j["target_pi"] = target_pi;
  j["empirical_pi"] = empirical_pi;
  j["max_inclusion_dev"] = max_inclusion_dev;
  j["calibration_dev"] = calibration_dev;
  if (enumerated) {
    j["entropy"] = entropy;
    j["hellinger_vs_rejective"] = hellinger_vs_rejective;
  }
  out << j.dump(2) << "\n";
}

}  // namespace fpresample
