#include "fpresample/designs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "fpresample/errors.hpp"
#include "fpresample/kernels.hpp"

namespace fpresample {
namespace {

constexpr std::size_t kEnumerationLimit = 12;
constexpr std::size_t kRejectionLimit = 1000000;

double logit(double p) {
  // Guard against endpoint rounding in iterates.
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}

}  // namespace

void InclusionProbs::validate() const {
  if (pi.empty()) throw std::invalid_argument("InclusionProbs: empty");
  if (sample_size == 0 || sample_size > pi.size()) {
    throw std::invalid_argument("InclusionProbs: sample size out of range");
  }
  double total = 0.0;
  for (double p : pi) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw std::invalid_argument("InclusionProbs: probabilities must lie in (0,1]");
    }
    total += p;
  }
  const double n = static_cast<double>(sample_size);
  if (std::abs(total - n) > 1e-9 * n) {
    throw std::invalid_argument("InclusionProbs: probabilities do not sum to the sample size");
  }
}

InclusionProbs inclusion_probs(std::span<const double> x, std::size_t n) {
  const std::size_t population = x.size();
  if (population == 0) throw std::invalid_argument("inclusion_probs: empty size vector");
  if (n == 0 || n > population) {
    throw std::invalid_argument("inclusion_probs: sample size out of range");
  }
  for (double v : x) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("inclusion_probs: size values must be positive and finite");
    }
  }

  InclusionProbs out;
  out.sample_size = n;
  out.pi.assign(population, 0.0);

  // Clamp-and-rescale: each pass fixes the currently clamped set and
  // re-spreads the remaining sample size over the rest.
  std::vector<std::uint8_t> clamped(population, 0);
  std::size_t n_clamped = 0;
  for (;;) {
    double free_total = 0.0;
    for (std::size_t i = 0; i < population; ++i) {
      if (!clamped[i]) free_total += x[i];
    }
    const double remaining = static_cast<double>(n - n_clamped);
    const double factor = remaining / free_total;
    bool new_clamp = false;
    for (std::size_t i = 0; i < population; ++i) {
      if (clamped[i]) continue;
      const double p = factor * x[i];
      if (p >= 1.0) {
        clamped[i] = 1;
        ++n_clamped;
        new_clamp = true;
      } else {
        out.pi[i] = p;
      }
    }
    if (!new_clamp) break;
    if (n_clamped > n) {
      throw NumericFailure("inclusion_probs: clamping exceeded the sample size");
    }
  }
  for (std::size_t i = 0; i < population; ++i) {
    if (clamped[i]) out.pi[i] = 1.0;
  }
  out.validate();
  return out;
}

InclusionProbs design_inclusion_probs(const DesignSpec& spec, std::span<const double> x,
                                      std::size_t n) {
  if (spec.kind == DesignKind::kSrs) {
    const std::vector<double> ones(x.size(), 1.0);
    return inclusion_probs(ones, n);
  }
  return inclusion_probs(x, n);
}

DesignKind design_kind_from_string(const std::string& name) {
  if (name == "srs") return DesignKind::kSrs;
  if (name == "poisson") return DesignKind::kPoisson;
  if (name == "conditional-poisson" || name == "cp") return DesignKind::kConditionalPoisson;
  if (name == "pareto" || name == "pa") return DesignKind::kPareto;
  throw std::invalid_argument("unknown design kind: " + name);
}

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::kSrs: return "srs";
    case DesignKind::kPoisson: return "poisson";
    case DesignKind::kConditionalPoisson: return "conditional-poisson";
    case DesignKind::kPareto: return "pareto";
  }
  return "?";
}

std::size_t sample_count(const SampleIndicator& d) {
  return static_cast<std::size_t>(std::count(d.begin(), d.end(), std::uint8_t{1}));
}

SampleIndicator draw_srs(std::size_t population, std::size_t n, Rng& rng) {
  if (n > population) throw std::invalid_argument("draw_srs: n exceeds population size");
  SampleIndicator d(population, 0);
  // Selection sampling: include unit i with probability (still needed)/(still left).
  std::size_t needed = n;
  for (std::size_t i = 0; i < population && needed > 0; ++i) {
    const std::size_t left = population - i;
    if (rng.uniform() * static_cast<double>(left) < static_cast<double>(needed)) {
      d[i] = 1;
      --needed;
    }
  }
  return d;
}

SampleIndicator draw_poisson(const InclusionProbs& probs, Rng& rng) {
  const std::size_t population = probs.population_size();
  SampleIndicator d(population);
  std::vector<double> u(population);
  rng.fill_uniform(u);
  kern::active_ops().bernoulli_mask(u.data(), probs.pi.data(), d.data(), population);
  return d;
}

SampleIndicator draw_pareto(const InclusionProbs& probs, Rng& rng) {
  const std::size_t population = probs.population_size();
  const std::size_t n = probs.sample_size;
  if (n >= population) {
    if (n == population) return SampleIndicator(population, 1);
    throw std::invalid_argument("draw_pareto: n exceeds population size");
  }

  SampleIndicator d(population, 0);
  std::vector<std::size_t> free_units;
  free_units.reserve(population);
  for (std::size_t i = 0; i < population; ++i) {
    if (probs.pi[i] >= 1.0) {
      d[i] = 1;  // certainty units never enter the ranking
    } else {
      free_units.push_back(i);
    }
  }
  const std::size_t k = n - (population - free_units.size());

  std::vector<double> u(free_units.size());
  std::vector<double> pi_free(free_units.size());
  std::vector<double> q(free_units.size());
  rng.fill_uniform(u);
  for (std::size_t j = 0; j < free_units.size(); ++j) pi_free[j] = probs.pi[free_units[j]];
  kern::active_ops().pareto_rank(u.data(), pi_free.data(), q.data(), free_units.size());

  std::vector<std::size_t> order(free_units.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto by_rank = [&](std::size_t a, std::size_t b) {
    return q[a] < q[b] || (q[a] == q[b] && free_units[a] < free_units[b]);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                   by_rank);
  for (std::size_t j = 0; j < k; ++j) d[free_units[order[j]]] = 1;
  return d;
}

namespace {

// The size-n conditional design is invariant to scaling every odds value by
// a constant, so the scale is free. Pin it so the unconditioned Bernoulli
// measure has expected size n: that centers the size distribution on n and
// keeps rejection sampling efficient.
void pin_odds_scale(std::vector<double>& odds, double n) {
  double lo = -45.0, hi = 45.0;  // log scale factor
  const auto expected_size = [&](double log_c) {
    const double c = std::exp(log_c);
    double total = 0.0;
    for (double w : odds) total += c * w / (1.0 + c * w);
    return total;
  };
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (expected_size(mid) < n ? lo : hi) = mid;
  }
  const double c = std::exp(0.5 * (lo + hi));
  for (double& w : odds) w *= c;
}

}  // namespace

std::vector<double> poisson_binomial_pmf(std::span<const double> probs, std::size_t k_max) {
  std::vector<double> pmf(k_max + 1, 0.0);
  pmf[0] = 1.0;
  std::size_t filled = 0;  // highest index that can be nonzero so far
  for (double p : probs) {
    const std::size_t top = std::min(filled + 1, k_max);
    for (std::size_t k = top; k >= 1; --k) {
      pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
    }
    pmf[0] *= 1.0 - p;
    filled = top;
  }
  return pmf;
}

std::vector<double> conditional_poisson_inclusion(std::span<const double> probs, std::size_t n) {
  const std::size_t population = probs.size();
  if (n > population) throw std::invalid_argument("conditional_poisson_inclusion: n > N");
  if (n == 0) return std::vector<double>(population, 0.0);
  if (n == population) return std::vector<double>(population, 1.0);

  // The pmf beyond n + buffer is negligible when the working measure is
  // centered at n; the buffer makes the downward deconvolution start in a
  // region of effectively zero mass.
  const std::size_t k_max = std::min(population, n + 256);
  const std::vector<double> pmf = poisson_binomial_pmf(probs, k_max);
  const double p_n = pmf[n];
  if (!(p_n > 0.0)) {
    throw NumericFailure("conditional_poisson_inclusion: size-n probability underflowed");
  }

  std::vector<double> incl(population);
  std::vector<double> loo(k_max + 1);  // leave-one-out pmf workspace
  for (std::size_t i = 0; i < population; ++i) {
    const double p = probs[i];
    double q_nm1;  // P_{-i}(n-1)
    if (p <= 0.5) {
      const double one_minus = 1.0 - p;
      loo[0] = pmf[0] / one_minus;
      for (std::size_t k = 1; k < n; ++k) {
        loo[k] = (pmf[k] - p * loo[k - 1]) / one_minus;
      }
      q_nm1 = loo[n - 1];
    } else {
      double above = 0.0;  // P_{-i}(k+1), starts as ~0 past the mass
      for (std::size_t k = k_max; k-- > n - 1;) {
        above = (pmf[k + 1] - (1.0 - p) * above) / p;
      }
      q_nm1 = above;
    }
    incl[i] = std::clamp(p * q_nm1 / p_n, 0.0, 1.0);
  }
  return incl;
}

ConditionalPoissonSampler::ConditionalPoissonSampler(const InclusionProbs& target, double tol,
                                                     int max_iterations) {
  target.validate();
  const std::size_t population = target.population_size();
  target_size_ = target.sample_size;
  working_probs_.assign(population, 1.0);
  achieved_.assign(population, 1.0);

  std::vector<double> goal;
  for (std::size_t i = 0; i < population; ++i) {
    if (target.pi[i] < 1.0) {
      free_units_.push_back(i);
      goal.push_back(target.pi[i]);
    }
  }
  free_size_ = target_size_ - (population - free_units_.size());
  if (free_units_.empty()) {
    return;  // census of certainty units only
  }

  const std::size_t m = free_units_.size();
  std::vector<double> psi(m);  // log-odds of the working measure
  for (std::size_t j = 0; j < m; ++j) psi[j] = logit(goal[j]);

  std::vector<double> odds(m);
  std::vector<double> probs_free(m);
  std::vector<double> achieved_free(m);
  double step = 1.0;
  double best_err = 1e300;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    for (std::size_t j = 0; j < m; ++j) odds[j] = std::exp(psi[j]);
    pin_odds_scale(odds, static_cast<double>(free_size_));
    for (std::size_t j = 0; j < m; ++j) probs_free[j] = odds[j] / (1.0 + odds[j]);
    achieved_free = conditional_poisson_inclusion(probs_free, free_size_);
    double err = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double gap = std::abs(achieved_free[j] - goal[j]);
      if (!std::isfinite(gap)) {
        err = 1e300;
        break;
      }
      err = std::max(err, gap);
    }
    if (err < tol) {
      for (std::size_t j = 0; j < m; ++j) psi[j] = std::log(odds[j]);
      break;
    }
    if (err > best_err) {
      step = std::max(step * 0.5, 1.0 / 16.0);  // damp when the fixed point overshoots
    }
    best_err = std::min(best_err, err);
    for (std::size_t j = 0; j < m; ++j) {
      psi[j] = std::clamp(std::log(odds[j]) + step * (logit(goal[j]) - logit(achieved_free[j])),
                          -40.0, 40.0);
    }
  }
  if (iter >= max_iterations) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "conditional Poisson calibration did not converge: max error %.3e after %d "
                  "iterations (N=%zu n=%zu)",
                  best_err, max_iterations, population, target_size_);
    throw NumericFailure(msg);
  }
  iterations_ = iter;
  for (std::size_t j = 0; j < m; ++j) {
    const double o = std::exp(psi[j]);
    working_probs_[free_units_[j]] = o / (1.0 + o);
    achieved_[free_units_[j]] = achieved_free[j];
  }
}

SampleIndicator ConditionalPoissonSampler::draw(Rng& rng) const {
  const std::size_t population = working_probs_.size();
  SampleIndicator d(population);
  std::vector<double> u(population);
  const auto& ops = kern::active_ops();
  for (std::size_t attempt = 0; attempt < kRejectionLimit; ++attempt) {
    rng.fill_uniform(u);
    ops.bernoulli_mask(u.data(), working_probs_.data(), d.data(), population);
    if (sample_count(d) == target_size_) return d;
  }
  throw NumericFailure("conditional Poisson draw: rejection limit reached");
}

SampleIndicator draw_conditional_poisson(const InclusionProbs& probs, Rng& rng) {
  return ConditionalPoissonSampler(probs).draw(rng);
}

SampleIndicator draw_design(const DesignSpec& spec, const InclusionProbs& probs, Rng& rng) {
  switch (spec.kind) {
    case DesignKind::kSrs:
      return draw_srs(probs.population_size(), probs.sample_size, rng);
    case DesignKind::kPoisson:
      return draw_poisson(probs, rng);
    case DesignKind::kConditionalPoisson:
      return draw_conditional_poisson(probs, rng);
    case DesignKind::kPareto:
      return draw_pareto(probs, rng);
  }
  throw std::invalid_argument("draw_design: unknown design kind");
}

double DesignDistribution::entropy() const {
  double h = 0.0;
  for (const auto& [mask, p] : mass) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<double> DesignDistribution::inclusion() const {
  std::vector<double> incl(population, 0.0);
  for (const auto& [mask, p] : mass) {
    for (std::size_t i = 0; i < population; ++i) {
      if (mask & (1u << i)) incl[i] += p;
    }
  }
  return incl;
}

namespace {

// Ranking-variable cdf of unit i remapped to s in [0,1] (q = s/(1-s)):
// F_i(s) = s pi / (a + s(2 pi - 1)), a = 1 - pi.
double pareto_rank_cdf(double pi, double s) {
  const double den = (1.0 - pi) + s * (2.0 * pi - 1.0);
  return s * pi / den;
}

double pareto_rank_pdf(double pi, double s) {
  const double den = (1.0 - pi) + s * (2.0 * pi - 1.0);
  return pi * (1.0 - pi) / (den * den);
}

// P(the n smallest ranking variables are exactly the units of `mask`):
// integral over the largest in-sample rank value.
double pareto_subset_mass(std::uint32_t mask, const std::vector<double>& pi) {
  static constexpr double kNodes[8] = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
      0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static constexpr double kWeights[8] = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
      0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  constexpr int kPanels = 24;

  const std::size_t population = pi.size();
  std::vector<std::size_t> inside, outside;
  for (std::size_t i = 0; i < population; ++i) {
    (mask & (1u << i)) ? inside.push_back(i) : outside.push_back(i);
  }

  double total = 0.0;
  for (int panel = 0; panel < kPanels; ++panel) {
    const double lo = static_cast<double>(panel) / kPanels;
    const double hi = static_cast<double>(panel + 1) / kPanels;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int g = 0; g < 8; ++g) {
      const double s = mid + half * kNodes[g];
      // d/ds prod_{k in S} F_k, via leave-one-out products.
      double deriv = 0.0;
      for (std::size_t i : inside) {
        double prod = pareto_rank_pdf(pi[i], s);
        for (std::size_t k : inside) {
          if (k != i) prod *= pareto_rank_cdf(pi[k], s);
        }
        deriv += prod;
      }
      double tail = 1.0;
      for (std::size_t j : outside) tail *= 1.0 - pareto_rank_cdf(pi[j], s);
      total += half * kWeights[g] * deriv * tail;
    }
  }
  return total;
}

}  // namespace

DesignDistribution enumerate_design(const DesignSpec& spec, const InclusionProbs& probs) {
  const std::size_t population = probs.population_size();
  if (population > kEnumerationLimit) {
    throw std::length_error("enumerate_design: population too large to enumerate");
  }
  const std::size_t n = probs.sample_size;
  const std::uint32_t top = 1u << population;

  DesignDistribution dist;
  dist.population = population;

  switch (spec.kind) {
    case DesignKind::kSrs: {
      std::uint32_t count = 0;
      for (std::uint32_t mask = 0; mask < top; ++mask) {
        if (std::popcount(mask) == static_cast<int>(n)) ++count;
      }
      const double p = 1.0 / count;
      for (std::uint32_t mask = 0; mask < top; ++mask) {
        if (std::popcount(mask) == static_cast<int>(n)) dist.mass.emplace_back(mask, p);
      }
      break;
    }
    case DesignKind::kPoisson: {
      for (std::uint32_t mask = 0; mask < top; ++mask) {
        double p = 1.0;
        for (std::size_t i = 0; i < population; ++i) {
          p *= (mask & (1u << i)) ? probs.pi[i] : 1.0 - probs.pi[i];
        }
        if (p > 0.0) dist.mass.emplace_back(mask, p);
      }
      break;
    }
    case DesignKind::kConditionalPoisson: {
      ConditionalPoissonSampler sampler(probs);
      const auto& wp = sampler.working_probs();
      double normalizer = 0.0;
      std::vector<std::pair<std::uint32_t, double>> raw;
      for (std::uint32_t mask = 0; mask < top; ++mask) {
        if (std::popcount(mask) != static_cast<int>(n)) continue;
        double p = 1.0;
        for (std::size_t i = 0; i < population; ++i) {
          p *= (mask & (1u << i)) ? wp[i] : 1.0 - wp[i];
        }
        if (p > 0.0) {
          raw.emplace_back(mask, p);
          normalizer += p;
        }
      }
      for (auto& [mask, p] : raw) p /= normalizer;
      dist.mass = std::move(raw);
      break;
    }
    case DesignKind::kPareto: {
      for (double p : probs.pi) {
        if (p >= 1.0) {
          throw std::invalid_argument("enumerate_design: Pareto enumeration needs all pi < 1");
        }
      }
      for (std::uint32_t mask = 0; mask < top; ++mask) {
        if (std::popcount(mask) != static_cast<int>(n)) continue;
        dist.mass.emplace_back(mask, pareto_subset_mass(mask, probs.pi));
      }
      break;
    }
  }
  return dist;
}

double hellinger_distance(const DesignDistribution& p, const DesignDistribution& r) {
  if (p.population != r.population) {
    throw std::invalid_argument("hellinger_distance: mismatched populations");
  }
  // Walk the union of supports (both sorted by mask).
  double h = 0.0;
  std::size_t a = 0, b = 0;
  while (a < p.mass.size() || b < r.mass.size()) {
    double pa = 0.0, pb = 0.0;
    if (b >= r.mass.size() || (a < p.mass.size() && p.mass[a].first < r.mass[b].first)) {
      pa = p.mass[a++].second;
    } else if (a >= p.mass.size() || r.mass[b].first < p.mass[a].first) {
      pb = r.mass[b++].second;
    } else {
      pa = p.mass[a++].second;
      pb = r.mass[b++].second;
    }
    const double diff = std::sqrt(pa) - std::sqrt(pb);
    h += diff * diff;
  }
  return h;
}

}  // namespace fpresample
