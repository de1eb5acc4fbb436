#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "amlmc/experiment.hpp"
#include "amlmc/plot.hpp"
#include "amlmc/reference.hpp"

using namespace amlmc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("amlmc_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_obstacle(const fs::path& dir) {
  ExperimentConfig c;
  c.benchmark = Benchmark::obstacle;
  c.modes = {RefinementMode::adaptive};
  c.tol_list = {0.1};
  c.replicas = 1;
  c.m_min = 4;
  c.eta1_norm = 0.3139;
  c.ref_resolution = 32;
  c.out_dir = dir.string();
  return c;
}

}  // namespace

TEST_CASE("config parsing, overrides and canonical dump") {
  std::istringstream in(
      "# comment line\n"
      "benchmark = obstacle\n"
      "tol_list=0.04, 0.02,0.01\n"
      "\n"
      "mode=adaptive\n"
      "replicas=3   # trailing comment\n"
      "seed=42\n"
      "m_min=20\n"
      "point_mass=0.5,-0.25\n");
  ExperimentConfig c = ExperimentConfig::parse(in);
  CHECK(c.benchmark == Benchmark::obstacle);
  CHECK(c.tol_list == std::vector<double>{0.04, 0.02, 0.01});
  CHECK(c.modes == std::vector<RefinementMode>{RefinementMode::adaptive});
  CHECK(c.replicas == 3);
  CHECK(c.seed == 42);
  CHECK(c.effective_m_min() == 20);
  CHECK(c.effective_theta() == doctest::Approx(0.2));
  REQUIRE(c.point_mass.has_value());
  CHECK((*c.point_mass)[1] == -0.25);
  CHECK_NOTHROW(c.validate());

  c.set("theta", "0.3");
  c.set("point_mass", "none");
  CHECK(c.effective_theta() == 0.3);
  CHECK_FALSE(c.point_mass.has_value());

  std::istringstream again(c.dump());
  CHECK(ExperimentConfig::parse(again).dump() == c.dump());
}

TEST_CASE("config rejects bad input") {
  ExperimentConfig c;
  CHECK_THROWS_AS(c.set("no_such_key", "1"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("replicas", "two"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("beta", "1.5x"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("benchmark", "heat"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("point_mass", "1"), std::invalid_argument);
  std::istringstream bad("benchmark poisson\n");
  CHECK_THROWS_AS(ExperimentConfig::parse(bad), std::invalid_argument);

  c.tol_list = {0.1, 0.2};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.tol_list = {0.2, 0.1};
  CHECK_NOTHROW(c.validate());
  c.replicas = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.replicas = 1;
  c.tol_list = {};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("missing CSV column is reported by name") {
  const fs::path dir = scratch("csv");
  std::ofstream(dir / "t.csv") << "mode,tol\nadaptive,0.1\n";
  const CsvTable t = read_csv(dir / "t.csv");
  CHECK(t.number(0, "tol") == 0.1);
  try {
    t.column("cost");
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("cost") != std::string::npos);
  }
}

TEST_CASE("plotting an empty sweep produces nothing and says so") {
  const fs::path dir = scratch("empty");
  std::ofstream(dir / "errors.csv") << "mode,tol,replica,error,cost,levels\n";
  const PlotOutcome out = plot_directory(dir, dir / "plots");
  CHECK(out.files.empty());
  CHECK(out.message.find("nothing plotted") != std::string::npos);
}

TEST_CASE("point-mass run reproduces the single path") {
  const fs::path dir = scratch("point");
  ExperimentConfig c = small_obstacle(dir);
  c.point_mass = std::array<double, 2>{0.2, -0.6};
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.rows.size() == 1);
  const MlmcReport& rep = r.reports[0];
  const int L = static_cast<int>(rep.levels.size());

  const ProblemFamily fam = c.family();
  PathwiseConfig pc;
  pc.theta = c.effective_theta();
  std::uint64_t cost = 0;
  for (const auto& lv : rep.levels) {
    const auto p = pathwise_solve(fam, {c.seed, lv.level, 0, 0, StreamTag::production}, r.schedule, pc);
    cost += static_cast<std::uint64_t>(lv.samples) * p.fine_dofs;
  }
  CHECK(r.rows[0].cost == cost);

  const auto path = pathwise_solve(fam, {c.seed, L, 0, 0, StreamTag::production}, r.schedule, pc);
  const auto sample = fam.sample_at({0.2, -0.6});
  const double single = h1_error(path.fine, sample.exact, sample.exact_gradient);
  CHECK(r.rows[0].error == doctest::Approx(single).epsilon(1e-9));

  CHECK(fs::exists(dir / "errors.csv"));
  CHECK(fs::exists(dir / "samples.csv"));
  CHECK(fs::exists(dir / "config.txt"));
  CHECK(fs::exists(dir / "reports" / "adaptive_tol0_rep0.json"));
}

TEST_CASE("uniform sweep reports the uniform vertex counts per level") {
  const fs::path dir = scratch("uniform");
  ExperimentConfig c = small_obstacle(dir);
  c.modes = {RefinementMode::uniform};
  c.tol_list = {0.02};
  c.point_mass = std::array<double, 2>{0.1, 0.1};
  run_experiment(c);
  const CsvTable t = read_csv(dir / "samples.csv");
  REQUIRE(t.rows.size() >= 4);
  const std::vector<double> expected{17, 33, 65, 129, 257, 513, 1025, 2049};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto l = static_cast<std::size_t>(t.number(i, "level"));
    CHECK(t.number(i, "avg_N") == expected[l - 1]);
  }
}

TEST_CASE("identical configurations write identical error tables") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ExperimentConfig c = small_obstacle(a);
  c.replicas = 2;
  run_experiment(c);
  c.out_dir = b.string();
  run_experiment(c);
  CHECK(slurp(a / "errors.csv") == slurp(b / "errors.csv"));
  CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
}

TEST_CASE("cost plot annotation carries the slope fitted from the CSV") {
  const fs::path dir = scratch("plot");
  ExperimentConfig c = small_obstacle(dir);
  c.tol_list = {0.2, 0.1, 0.05};
  c.replicas = 2;
  run_experiment(c);

  // Independent fit of log mean cost against log(1/Tol) from errors.csv.
  const CsvTable e = read_csv(dir / "errors.csv");
  std::map<double, std::pair<double, int>> mean;
  for (std::size_t i = 0; i < e.rows.size(); ++i) {
    auto& m = mean[e.number(i, "tol")];
    m.first += e.number(i, "cost");
    m.second += 1;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(mean.size());
  for (auto& [tol, m] : mean) {
    const double x = std::log(1.0 / tol), y = std::log(m.first / m.second);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const CsvTable fit = read_csv(dir / "costfit.csv");
  REQUIRE(fit.rows.size() == 1);
  CHECK(fit.number(0, "slope") == doctest::Approx(slope).epsilon(1e-10));

  const PlotOutcome out = plot_directory(dir, dir / "plots");
  CHECK(out.files.size() >= 2);
  const std::string svg = slurp(dir / "plots" / "cost.svg");
  CHECK(svg.find("slope " + fit.text(0, "slope").substr(0, 6)) != std::string::npos);
  CHECK(slurp(dir / "plots" / "errors.svg").find("Tol") != std::string::npos);
}

TEST_CASE("uniform dof study follows the vertex-count law") {
  const auto fam = ProblemFamily::obstacle();
  const auto sched = ToleranceSchedule::from_eta1(0.3139);
  PathwiseConfig pc;
  pc.mode = RefinementMode::uniform;
  const auto r = dof_scaling_study(fam, sched, RefinementMode::uniform, 6, 1, 1, pc);
  CHECK(r.max_dofs == std::vector<std::size_t>{17, 33, 65, 129, 257, 513});
  CHECK(r.expected_slope == doctest::Approx(std::log(2.0)));
  CHECK(r.fit.slope == doctest::Approx(std::log(2.0)).epsilon(0.03));

  const fs::path dir = scratch("dof");
  write_dof_scaling(dir, r);
  const CsvTable t = read_csv(dir / "dofscaling.csv");
  CHECK(t.rows.size() == 6);
  CHECK(t.number(5, "max_N") == 513);
}
