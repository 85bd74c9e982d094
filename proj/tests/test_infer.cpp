#include <doctest.h>

#include <cmath>
#include <vector>

#include "fpresample/errors.hpp"
#include "fpresample/infer.hpp"
#include "test_support.hpp"

using namespace fpresample;

namespace {

SampleData stratified_sample(std::size_t big_n, std::size_t n, double rho, std::uint64_t seed) {
  Rng rng(seed);
  auto pop = gen_stratified_model(big_n, rho, rng);
  auto probs = inclusion_probs(pop.x, n);
  auto d = draw_pareto(probs, rng);
  return extract_sample(pop, probs, d);
}

SampleData marshall_olkin_sample(std::size_t big_n, std::size_t n, double rho,
                                 std::uint64_t seed) {
  Rng rng(seed);
  auto pop = gen_marshall_olkin_model(big_n, rho, 0.08, rng);
  auto probs = inclusion_probs(pop.x, n);
  auto d = draw_pareto(probs, rng);
  return extract_sample(pop, probs, d);
}

}  // namespace

TEST_CASE("inverse normal cdf") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-9));
  CHECK(normal_quantile(0.995) == doctest::Approx(2.5758293035489004).epsilon(1e-9));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0));
  CHECK(normal_quantile(0.0001) == doctest::Approx(-3.719016485455709).epsilon(1e-9));
  for (double p : {0.001, 0.1, 0.4, 0.77, 0.999}) {
    CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1 - p)).epsilon(1e-12));
    // Round trip through the exact cdf.
    const double z = normal_quantile(p);
    CHECK(0.5 * std::erfc(-z / std::sqrt(2.0)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS((void)normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("quantile confidence intervals") {
  Rng rng(7);
  auto pop = gen_quantile_model(500, rng);
  auto probs = inclusion_probs(pop.x, 50);
  auto d = draw_pareto(probs, rng);
  const SampleData sample = extract_sample(pop, probs, d);
  const DesignSpec pareto{DesignKind::kPareto};

  SUBCASE("point estimate sits inside and matches the weighted quantile") {
    const ConfidenceInterval ci = quantile_ci(sample, 0.5, 0.05, 300, pareto, StreamKey{11});
    CHECK(ci.point == sample.hajek().quantile(0.5));
    CHECK(ci.lower <= ci.point);
    CHECK(ci.point <= ci.upper);
    CHECK(ci.level == doctest::Approx(0.95));
  }

  SUBCASE("interval nesting is exact across levels on one replicate set") {
    const StreamKey key{12};
    const ConfidenceInterval c10 = quantile_ci(sample, 0.5, 0.10, 300, pareto, key);
    const ConfidenceInterval c05 = quantile_ci(sample, 0.5, 0.05, 300, pareto, key);
    const ConfidenceInterval c01 = quantile_ci(sample, 0.5, 0.01, 300, pareto, key);
    CHECK(c01.lower < c05.lower);
    CHECK(c05.lower < c10.lower);
    CHECK(c10.upper < c05.upper);
    CHECK(c05.upper < c01.upper);
  }

  SUBCASE("alpha near one collapses the interval onto the point") {
    const ConfidenceInterval wide = quantile_ci(sample, 0.5, 0.05, 300, pareto, StreamKey{13});
    const ConfidenceInterval slim =
        quantile_ci(sample, 0.5, 0.999999, 300, pareto, StreamKey{13});
    CHECK(slim.upper - slim.lower < 1e-4 * (wide.upper - wide.lower));
  }

  SUBCASE("batched grid shares one replicate set") {
    const std::vector<double> grid{0.25, 0.5, 0.75};
    const auto cis = quantile_ci_batch(sample, grid, 0.05, 300, pareto, StreamKey{14});
    REQUIRE(cis.size() == 3);
    const ConfidenceInterval solo = quantile_ci(sample, 0.5, 0.05, 300, pareto, StreamKey{14});
    CHECK(cis[1].lower == doctest::Approx(solo.lower));
    CHECK(cis[1].upper == doctest::Approx(solo.upper));
  }

  SUBCASE("degenerate spread flags the interval") {
    SampleData flat;
    flat.y.assign(10, 3.0);
    flat.x.assign(10, 1.0);
    flat.pi.assign(10, 0.25);
    flat.population_size = 40;
    const ConfidenceInterval ci = quantile_ci(flat, 0.5, 0.05, 100, pareto, StreamKey{15});
    CHECK(ci.degenerate);
    CHECK(ci.lower == ci.upper);
  }

  SUBCASE("bad levels are rejected") {
    CHECK_THROWS_AS((void)quantile_ci(sample, 0.0, 0.05, 100, pareto, StreamKey{16}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)quantile_ci(sample, 0.5, 1.0, 100, pareto, StreamKey{16}),
                    std::invalid_argument);
  }
}

TEST_CASE("conditional independence test") {
  const DesignSpec pareto{DesignKind::kPareto};

  SUBCASE("comonotone strata reject with a vanishing p-value") {
    SampleData s;
    Rng rng(31);
    for (int i = 0; i < 150; ++i) {
      const int t = 1 + static_cast<int>(rng.uniform_index(2));
      const double v = rng.normal();
      s.y.push_back(100.0 * t + v);
      s.z.push_back(50.0 * t + std::exp(v));  // strictly increasing in y within stratum
      s.t.push_back(t);
      s.x.push_back(t);
      s.pi.push_back(0.1 * t);
      s.population_size = 1500;
    }
    const TestResult res = cond_independence_test(s, 0.05, 400, pareto, StreamKey{41});
    CHECK(res.reject);
    REQUIRE(res.p_value.has_value());
    CHECK(*res.p_value <= 0.01);
    CHECK(res.statistic > 0.9);
  }

  SUBCASE("statistic is invariant under increasing transforms") {
    const SampleData s = stratified_sample(500, 50, 0.4, 77);
    const auto w = s.weights();
    const double before = spearman_rho_conditional(s.y, s.z, s.t, w);
    SampleData mapped = s;
    for (double& v : mapped.y) v = std::exp(v / 300.0);
    for (double& v : mapped.z) v = v * v * v;  // values are positive
    const double after = spearman_rho_conditional(mapped.y, mapped.z, mapped.t, w);
    CHECK(before == after);
  }

  SUBCASE("p-values and decisions replay under a fixed key") {
    const SampleData s = stratified_sample(500, 50, 0.0, 78);
    const TestResult a = cond_independence_test(s, 0.05, 200, pareto, StreamKey{42});
    const TestResult b = cond_independence_test(s, 0.05, 200, pareto, StreamKey{42});
    CHECK(a.reject == b.reject);
    CHECK(a.critical_value == b.critical_value);
    CHECK(*a.p_value == *b.p_value);
    CHECK(a.reject == (std::abs(a.statistic) > a.critical_value));
  }

  SUBCASE("missing structure is rejected") {
    SampleData s;
    s.y = {1, 2, 3};
    s.x = {1, 1, 1};
    s.pi = {0.3, 0.3, 0.3};
    s.population_size = 10;
    CHECK_THROWS_AS((void)cond_independence_test(s, 0.05, 100, pareto, StreamKey{43}),
                    std::invalid_argument);
  }
}

TEST_CASE("marginal independence test") {
  const DesignSpec pareto{DesignKind::kPareto};

  SUBCASE("comonotone pair rejects") {
    const SampleData s = marshall_olkin_sample(2500, 250, 1.0, 91);
    const TestResult res = marg_independence_test(s, 0.05, 400, pareto, StreamKey{51});
    CHECK(res.reject);
    CHECK_FALSE(res.p_value.has_value());
  }

  SUBCASE("interval inversion consistency") {
    const SampleData s = marshall_olkin_sample(1000, 100, 0.0, 92);
    const auto results =
        marg_independence_test_multi(s, std::vector<double>{0.10, 0.05, 0.01}, 400, pareto,
                                     StreamKey{52});
    REQUIRE(results.size() == 3);
    // Wider confidence (smaller alpha) can only turn rejections off.
    CHECK(results[0].critical_value < results[1].critical_value);
    CHECK(results[1].critical_value < results[2].critical_value);
    if (results[2].reject) CHECK(results[1].reject);
    if (results[1].reject) CHECK(results[0].reject);
    for (const TestResult& r : results) {
      CHECK(r.reject == (std::abs(r.statistic) > r.critical_value));
      CHECK_FALSE(r.p_value.has_value());
    }
  }

  SUBCASE("decision replays under a fixed key") {
    const SampleData s = marshall_olkin_sample(1000, 100, 0.3, 93);
    const TestResult a = marg_independence_test(s, 0.05, 300, pareto, StreamKey{53});
    const TestResult b = marg_independence_test(s, 0.05, 300, pareto, StreamKey{53});
    CHECK(a.reject == b.reject);
    CHECK(a.statistic == b.statistic);
    CHECK(a.critical_value == b.critical_value);
  }
}
