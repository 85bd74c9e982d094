#include "fpresample/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "fpresample/errors.hpp"

namespace fpresample {
namespace {

/// Cumulative table for categorical draws over sample rows.
class CategoricalTable {
 public:
  explicit CategoricalTable(std::span<const double> weights) : cum_(weights.size()) {
    double running = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      running += weights[i];
      cum_[i] = running;
    }
    total_ = running;
  }

  std::size_t draw(Rng& rng) const {
    const double target = rng.uniform() * total_;
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    const std::size_t k = static_cast<std::size_t>(it - cum_.begin());
    return k < cum_.size() ? k : cum_.size() - 1;
  }

 private:
  std::vector<double> cum_;
  double total_ = 0.0;
};

}  // namespace

std::vector<double> SampleData::weights() const {
  std::vector<double> w(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) w[i] = 1.0 / pi[i];
  return w;
}

WeightedEDF SampleData::hajek() const {
  const auto w = weights();
  return hajek_df_weighted(y, w);
}

SampleData extract_sample(const Population& pop, const InclusionProbs& probs,
                          const SampleIndicator& d) {
  const std::size_t population = pop.size();
  if (probs.population_size() != population || d.size() != population) {
    throw std::invalid_argument("extract_sample: length mismatch");
  }
  SampleData s;
  s.population_size = population;
  for (std::size_t i = 0; i < population; ++i) {
    if (!d[i]) continue;
    s.y.push_back(pop.y[i]);
    s.x.push_back(pop.x[i]);
    s.pi.push_back(probs.pi[i]);
    if (pop.has_z()) s.z.push_back(pop.z[i]);
    if (pop.has_t()) s.t.push_back(pop.t[i]);
  }
  if (s.y.empty()) throw std::invalid_argument("extract_sample: empty sample");
  return s;
}

PseudoPopulation phase1_pseudo_population(const SampleData& sample, std::size_t population,
                                          Rng& rng) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("phase1_pseudo_population: empty sample");
  if (population < n) {
    throw std::invalid_argument("phase1_pseudo_population: population below sample size");
  }
  const CategoricalTable table(sample.weights());

  PseudoPopulation pp;
  pp.counts.assign(n, 0);
  pp.y.resize(population);
  pp.x.resize(population);
  if (sample.has_z()) pp.z.resize(population);
  if (sample.has_t()) pp.t.resize(population);
  for (std::size_t k = 0; k < population; ++k) {
    const std::size_t i = table.draw(rng);
    ++pp.counts[i];
    pp.y[k] = sample.y[i];
    pp.x[k] = sample.x[i];
    if (sample.has_z()) pp.z[k] = sample.z[i];
    if (sample.has_t()) pp.t[k] = sample.t[i];
  }
  return pp;
}

PseudoPopulation h0_pseudo_population(const SampleData& sample, std::size_t population,
                                      Rng& rng) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("h0_pseudo_population: empty sample");
  if (!sample.has_t() || !sample.has_z()) {
    throw std::invalid_argument("h0_pseudo_population: needs strata and two study variables");
  }

  const auto w = sample.weights();
  const CategoricalTable label_table(w);

  // Per-stratum tables over the cell's rows with renormalized weights.
  std::map<int, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i) cells[sample.t[i]].push_back(i);
  std::map<int, std::pair<std::vector<std::size_t>, CategoricalTable>> cell_tables;
  for (const auto& [label, rows] : cells) {
    if (rows.empty()) throw DegenerateCell(std::to_string(label), "no sampled units");
    std::vector<double> cw(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) cw[j] = w[rows[j]];
    cell_tables.emplace(label, std::make_pair(rows, CategoricalTable(cw)));
  }

  PseudoPopulation pp;
  pp.y.resize(population);
  pp.z.resize(population);
  pp.x.resize(population);
  pp.t.resize(population);
  for (std::size_t k = 0; k < population; ++k) {
    const int label = sample.t[label_table.draw(rng)];
    const auto& [rows, table] = cell_tables.at(label);
    // Two independent within-cell draws break the joint dependence.
    pp.y[k] = sample.y[rows[table.draw(rng)]];
    pp.z[k] = sample.z[rows[table.draw(rng)]];
    pp.t[k] = label;
    pp.x[k] = static_cast<double>(label);
  }
  return pp;
}

PseudoPopulation holmberg_pseudo_population(const SampleData& sample, Rng& rng) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("holmberg_pseudo_population: empty sample");
  PseudoPopulation pp;
  pp.counts.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / sample.pi[i];
    const double whole = std::floor(inv);
    const double frac = inv - whole;
    std::uint32_t c = static_cast<std::uint32_t>(whole);
    if (frac > 0.0 && rng.uniform() < frac) ++c;
    pp.counts[i] = c;
    for (std::uint32_t r = 0; r < c; ++r) {
      pp.y.push_back(sample.y[i]);
      pp.x.push_back(sample.x[i]);
      if (sample.has_z()) pp.z.push_back(sample.z[i]);
      if (sample.has_t()) pp.t.push_back(sample.t[i]);
    }
  }
  return pp;
}

Phase2Draw phase2_redraw(const PseudoPopulation& pp, std::size_t n, const DesignSpec& design,
                         Rng& rng) {
  if (!design.fixed_size()) {
    throw std::invalid_argument("phase2_redraw: redraw design must be fixed-size");
  }
  Phase2Draw out;
  out.pi_star = inclusion_probs(pp.x, n);
  out.d = draw_design(design, out.pi_star, rng);
  return out;
}

ResampledSample gather_resampled(const PseudoPopulation& pp, const Phase2Draw& draw) {
  ResampledSample s;
  for (std::size_t k = 0; k < pp.size(); ++k) {
    if (!draw.d[k]) continue;
    s.y.push_back(pp.y[k]);
    s.weight.push_back(1.0 / draw.pi_star.pi[k]);
    if (!pp.z.empty()) s.z.push_back(pp.z[k]);
    if (!pp.t.empty()) s.t.push_back(pp.t[k]);
  }
  return s;
}

WeightedEDF ResampledSample::hajek() const { return hajek_df_weighted(y, weight); }

WeightedEDF resampled_hajek(const PseudoPopulation& pp, const Phase2Draw& draw) {
  return gather_resampled(pp, draw).hajek();
}

double ResamplingDistribution::s2_star() const {
  const std::size_t m = z_values.size();
  if (m < 2) return 0.0;
  double mean = 0.0;
  for (double z : z_values) mean += z;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double z : z_values) ss += (z - mean) * (z - mean);
  return ss / static_cast<double>(m - 1);
}

double ResamplingDistribution::s_star() const { return std::sqrt(s2_star()); }

WeightedEDF ResamplingDistribution::edf() const {
  return WeightedEDF::equal_mass(std::vector<double>(z_values.begin(), z_values.end()));
}

std::vector<ResamplingDistribution> bootstrap_many(std::span<const ReplicateStatistic> statistics,
                                                   std::span<const double> centers,
                                                   const SampleData& sample,
                                                   const BootstrapConfig& config, StreamKey key) {
  if (statistics.size() != centers.size()) {
    throw std::invalid_argument("bootstrap_many: statistics/centers length mismatch");
  }
  if (config.replicates < 2) throw std::invalid_argument("bootstrap_many: need at least 2 replicates");
  const std::size_t n = sample.size();
  const std::size_t big_n = sample.population_size;
  const double root_n = std::sqrt(static_cast<double>(n));

  std::vector<ResamplingDistribution> out(statistics.size());
  for (auto& rd : out) rd.z_values.reserve(config.replicates);

  std::size_t failed = 0;
  std::string first_error;
  std::vector<double> replicate_values(statistics.size());
  for (std::size_t m = 0; m < config.replicates; ++m) {
    Rng rng = key.child(m).rng();
    try {
      const PseudoPopulation pp = config.scheme == PseudoScheme::kTwoPhase
                                      ? phase1_pseudo_population(sample, big_n, rng)
                                      : h0_pseudo_population(sample, big_n, rng);
      const Phase2Draw draw = phase2_redraw(pp, n, config.design, rng);
      const ResampledSample rs = gather_resampled(pp, draw);
      // Evaluate everything before committing so a throw drops the whole
      // replicate for every statistic.
      for (std::size_t k = 0; k < statistics.size(); ++k) {
        replicate_values[k] = root_n * (statistics[k](rs) - centers[k]);
      }
      for (std::size_t k = 0; k < statistics.size(); ++k) {
        out[k].z_values.push_back(replicate_values[k]);
      }
    } catch (const std::exception& e) {
      ++failed;
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (static_cast<double>(failed) >
      config.max_failure_rate * static_cast<double>(config.replicates)) {
    char msg[256];
    std::snprintf(msg, sizeof msg, "bootstrap: %zu of %zu replicates failed (first error: %s)",
                  failed, config.replicates, first_error.c_str());
    throw NumericFailure(msg);
  }
  for (auto& rd : out) rd.failed = failed;
  return out;
}

ResamplingDistribution bootstrap(const Functional& theta, const SampleData& sample,
                                 std::size_t bootstrap_replicates, const DesignSpec& design,
                                 StreamKey key) {
  const double center = theta.evaluate(sample.hajek());
  const ReplicateStatistic stat = [&theta](const ResampledSample& rs) {
    return theta.evaluate(rs.hajek());
  };
  BootstrapConfig config;
  config.replicates = bootstrap_replicates;
  config.design = design;
  auto result = bootstrap_many(std::span(&stat, 1), std::span(&center, 1), sample, config, key);
  return std::move(result.front());
}

std::vector<ResamplingDistribution> efron_resample_many(
    std::span<const ReplicateStatistic> statistics, std::span<const double> centers,
    const SampleData& sample, std::size_t replicates, StreamKey key) {
  if (statistics.size() != centers.size()) {
    throw std::invalid_argument("efron_resample_many: statistics/centers length mismatch");
  }
  const std::size_t n = sample.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  const CategoricalTable table(sample.weights());

  std::vector<ResamplingDistribution> out(statistics.size());
  for (std::size_t m = 0; m < replicates; ++m) {
    Rng rng = key.child(m).rng();
    ResampledSample rs;
    rs.y.resize(n);
    rs.weight.assign(n, 1.0 / static_cast<double>(n));
    if (sample.has_z()) rs.z.resize(n);
    if (sample.has_t()) rs.t.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t i = table.draw(rng);
      rs.y[j] = sample.y[i];
      if (sample.has_z()) rs.z[j] = sample.z[i];
      if (sample.has_t()) rs.t[j] = sample.t[i];
    }
    for (std::size_t k = 0; k < statistics.size(); ++k) {
      out[k].z_values.push_back(root_n * (statistics[k](rs) - centers[k]));
    }
  }
  return out;
}

ResamplingDistribution efron_resample(const Functional& theta, const SampleData& sample,
                                      std::size_t replicates, StreamKey key) {
  const double center = theta.evaluate(sample.hajek());
  const ReplicateStatistic stat = [&theta](const ResampledSample& rs) {
    return theta.evaluate(rs.hajek());
  };
  auto result =
      efron_resample_many(std::span(&stat, 1), std::span(&center, 1), sample, replicates, key);
  return std::move(result.front());
}

}  // namespace fpresample
