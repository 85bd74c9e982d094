#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "fpresample/errors.hpp"
#include "fpresample/harness.hpp"
#include "fpresample/parallel.hpp"
#include "test_support.hpp"

using namespace fpresample;

namespace {

ScenarioConfig small_quantile_config() {
  ScenarioConfig cfg;
  cfg.model.kind = ModelKind::kQuantile;
  cfg.population_size = 120;
  cfg.sample_size = 12;
  cfg.bootstrap_replicates = 60;
  cfg.replications = 16;
  cfg.p_grid = {0.25, 0.5};
  cfg.seed = 404;
  cfg.threads = 1;
  cfg.oracle_sims = 20000;
  return cfg;
}

}  // namespace

TEST_CASE("scenario config parsing") {
  SUBCASE("all keys round-trip") {
    std::istringstream in(
        "[table1]\n"
        "model = quantile\n"
        "N = 500\n"
        "n = 50\n"
        "sampling_design = pareto\n"
        "resampling_design = conditional-poisson\n"
        "M = 500\n"
        "reps = 300\n"
        "p_grid = 0.10 0.25, 0.50\n"
        "alpha = 0.05\n"
        "seed = 42\n"
        "threads = 2\n"
        "# comment line\n"
        "; another comment\n"
        "\n"
        "[table5]\n"
        "model = stratified\n"
        "rho_s = 0.5\n"
        "N = 1500\n"
        "n = 150\n"
        "rho_grid = 0 0.2 0.4\n"
        "alpha_grid = 0.1 0.05\n");
    const auto scenarios = parse_scenarios(in);
    REQUIRE(scenarios.size() == 2);
    CHECK(scenarios[0].name == "table1");
    CHECK(scenarios[0].population_size == 500);
    CHECK(scenarios[0].resampling_design.kind == DesignKind::kConditionalPoisson);
    CHECK(scenarios[0].p_grid == std::vector<double>{0.10, 0.25, 0.50});
    CHECK(scenarios[1].model.kind == ModelKind::kStratified);
    CHECK(scenarios[1].model.spearman_rho == 0.5);
    CHECK(scenarios[1].rho_grid.size() == 3);
    CHECK(scenarios[1].alpha_grid.size() == 2);
  }

  SUBCASE("unknown keys are config errors") {
    std::istringstream in("[s]\nmodle = quantile\n");
    CHECK_THROWS_AS(parse_scenarios(in), ConfigError);
  }

  SUBCASE("bad values are config errors") {
    std::istringstream in("[s]\nN = lots\n");
    CHECK_THROWS_AS(parse_scenarios(in), ConfigError);
  }

  SUBCASE("missing file names the path") {
    try {
      load_scenarios("/nonexistent/path/t.cfg");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/path/t.cfg") != std::string::npos);
    }
  }

  SUBCASE("validation rejects inconsistent scenarios") {
    ScenarioConfig cfg = small_quantile_config();
    cfg.sample_size = cfg.population_size + 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_quantile_config();
    cfg.bootstrap_replicates = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_quantile_config();
    cfg.sampling_design.kind = DesignKind::kPoisson;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("quantile study reports") {
  const ScenarioConfig cfg = small_quantile_config();
  const IndicatorReport report = run_quantile_study(cfg);
  REQUIRE(report.quantile_cells.size() == 2);

  SUBCASE("coverage identity is exact in counts") {
    for (const auto& cell : report.quantile_cells) {
      CHECK(cell.covered + cell.missed_left + cell.missed_right == cell.reps);
      CHECK(cell.reps == cfg.replications);
      CHECK(cell.cp() >= 0.0);
      CHECK(cell.cp() <= 1.0);
      CHECK(cell.al() >= 0.0);
      const double se = cell.rate_se(cell.cp());
      CHECK(se == doctest::Approx(std::sqrt(cell.cp() * (1 - cell.cp()) / cell.reps)));
    }
  }

  SUBCASE("report is independent of the thread count") {
    ScenarioConfig threaded = cfg;
    threaded.threads = 2;
    const IndicatorReport again = run_quantile_study(threaded);
    std::ostringstream a, b;
    report.write_csv(a);
    again.write_csv(b);
    CHECK(a.str() == b.str());
  }

  SUBCASE("identical seeds give byte-identical csv and json") {
    const IndicatorReport again = run_quantile_study(cfg);
    std::ostringstream a, b, ja, jb;
    report.write_csv(a);
    again.write_csv(b);
    report.write_json(ja);
    again.write_json(jb);
    CHECK(a.str() == b.str());
    CHECK(ja.str() == jb.str());
  }

  SUBCASE("csv layout mirrors the indicator table") {
    std::ostringstream out;
    report.write_csv(out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "metric,p=0.25,p=0.5");
    std::getline(in, line);
    CHECK(line.substr(0, 3) == "CP,");
    std::getline(in, line);
    CHECK(line.substr(0, 3) == "LE,");
    std::getline(in, line);
    CHECK(line.substr(0, 3) == "RE,");
    std::getline(in, line);
    CHECK(line.substr(0, 3) == "AL,");
  }

  SUBCASE("json mirror parses and matches the cells") {
    std::ostringstream out;
    report.write_json(out);
    const auto j = nlohmann::json::parse(out.str());
    CHECK(j["study"] == "quantile");
    REQUIRE(j["cells"].size() == 2);
    CHECK(j["cells"][0]["p"] == 0.25);
    CHECK(j["cells"][0]["CP"].get<double>() == report.quantile_cells[0].cp());
  }
}

TEST_CASE("single-replicate study still produces a coherent report") {
  ScenarioConfig cfg = small_quantile_config();
  cfg.replications = 1;
  const IndicatorReport report = run_quantile_study(cfg);
  for (const auto& cell : report.quantile_cells) {
    CHECK(cell.reps == 1);
    CHECK(cell.covered + cell.missed_left + cell.missed_right == 1);
  }
}

TEST_CASE("test study reports") {
  ScenarioConfig cfg;
  cfg.model.kind = ModelKind::kStratified;
  cfg.model.spearman_rho = 0.0;
  cfg.population_size = 150;
  cfg.sample_size = 15;
  cfg.bootstrap_replicates = 80;
  cfg.replications = 12;
  cfg.seed = 505;
  cfg.threads = 2;

  const IndicatorReport report = run_test_study(cfg, TestKind::kConditional);
  REQUIRE(report.test_cells.size() == 1);
  const TestCell& cell = report.test_cells[0];
  CHECK(cell.reps == 12);
  CHECK(cell.rate() >= 0.0);
  CHECK(cell.rate() <= 1.0);
  CHECK(cell.median_p_value >= 0.0);
  CHECK(cell.median_p_value <= 1.0);
  CHECK(cell.scenario == "pa-pa");

  SUBCASE("csv is long-format and plot-ready") {
    std::ostringstream out;
    report.write_csv(out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "scenario,rho,alpha,rate,rate_se,median_p,reps");
  }

  SUBCASE("marginal study carries no p-values") {
    ScenarioConfig mo = cfg;
    mo.model.kind = ModelKind::kMarshallOlkin;
    mo.model.mo_size_log_var = 0.08;
    mo.sampling_design.kind = DesignKind::kConditionalPoisson;
    const IndicatorReport marg = run_test_study(mo, TestKind::kMarginal);
    REQUIRE(marg.test_cells.size() == 1);
    CHECK(marg.test_cells[0].median_p_value < 0.0);
    CHECK(marg.test_cells[0].scenario == "cp-pa");
  }

  SUBCASE("model/test mismatch is a config error") {
    CHECK_THROWS_AS(run_test_study(cfg, TestKind::kMarginal), ConfigError);
  }
}

TEST_CASE("shortest round-trip formatting") {
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    double v;
    switch (i % 4) {
      case 0: v = rng.normal(); break;
      case 1: v = std::exp(20 * rng.normal()); break;
      case 2: v = static_cast<double>(rng.next()) / 7.0; break;
      default: v = rng.uniform(); break;
    }
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("thread resolution prefers explicit, then environment") {
  CHECK(resolve_threads(3) == 3);
  setenv("FPRESAMPLE_THREADS", "5", 1);
  CHECK(resolve_threads(0) == 5);
  unsetenv("FPRESAMPLE_THREADS");
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("study profiles rescale the replicate counts") {
  std::istringstream in("[s]\nmodel = quantile\nN = 100\nn = 10\nprofile = paper\n");
  const auto scenarios = parse_scenarios(in);
  CHECK(scenarios[0].replications == 1000);
  CHECK(scenarios[0].bootstrap_replicates == 1000);

  ScenarioConfig cfg;
  cfg.set_profile("desk");
  CHECK(cfg.replications == 300);
  CHECK(cfg.bootstrap_replicates == 500);
  CHECK_THROWS_AS(cfg.set_profile("huge"), ConfigError);
}

TEST_CASE("reported operating points hold at reduced scale") {
  // Yardstick cells of the simulation studies, checked at desk scale with
  // pinned seeds.
  SUBCASE("coverage at p=0.10, n=50, f=1/3") {
    ScenarioConfig cfg;
    cfg.model.kind = ModelKind::kQuantile;
    cfg.population_size = 150;
    cfg.sample_size = 50;
    cfg.bootstrap_replicates = 500;
    cfg.replications = 300;
    cfg.p_grid = {0.10};
    cfg.seed = 21;
    const IndicatorReport rep = run_quantile_study(cfg);
    CHECK(rep.quantile_cells[0].cp() == testsupport::approx_abs(0.949, 0.03));
  }

  SUBCASE("extreme-quantile coverage dips at p=0.90, n=150, f=1/3") {
    ScenarioConfig cfg;
    cfg.model.kind = ModelKind::kQuantile;
    cfg.population_size = 450;
    cfg.sample_size = 150;
    cfg.bootstrap_replicates = 500;
    cfg.replications = 300;
    cfg.p_grid = {0.90};
    cfg.seed = 21;
    const IndicatorReport rep = run_quantile_study(cfg);
    CHECK(rep.quantile_cells[0].cp() == testsupport::approx_abs(0.91, 0.03));
  }

  SUBCASE("null p-values center at one half") {
    ScenarioConfig cfg;
    cfg.model.kind = ModelKind::kStratified;
    cfg.model.spearman_rho = 0.0;
    cfg.population_size = 1500;
    cfg.sample_size = 150;
    cfg.bootstrap_replicates = 400;
    cfg.replications = 150;
    cfg.seed = 21;
    const IndicatorReport rep = run_test_study(cfg, TestKind::kConditional);
    CHECK(rep.test_cells[0].median_p_value == testsupport::approx_abs(0.5, 0.1));
  }

  SUBCASE("median p-value hits zero by rho 0.6 at n=50") {
    ScenarioConfig cfg;
    cfg.model.kind = ModelKind::kStratified;
    cfg.model.spearman_rho = 0.6;
    cfg.population_size = 150;
    cfg.sample_size = 50;
    cfg.bootstrap_replicates = 400;
    cfg.replications = 150;
    cfg.seed = 21;
    const IndicatorReport rep = run_test_study(cfg, TestKind::kConditional);
    CHECK(rep.test_cells[0].median_p_value == 0.0);
  }
}
