// Command-line front end: calibrate | run | dofscale | plot.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "amlmc/experiment.hpp"
#include "amlmc/plot.hpp"

namespace {

const char* kKeys[] = {"benchmark", "beta",       "tol_list",       "mode",         "seed",
                       "replicas",  "theta",      "q",              "sigma_alg",    "c_est",
                       "m_min",     "allocation", "solver",         "out_dir",      "ref_resolution",
                       "calibration_samples",     "max_levels",     "max_refinements",
                       "dof_samples", "dof_levels", "eta1_norm", "point_mass"};

struct Common {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "key=value configuration file");
  for (const char* key : kKeys) {
    app->add_option_function<std::string>(
        std::string("--") + key, [&c, key](const std::string& v) { c.overrides[key] = v; },
        std::string("override '") + key + "'");
  }
}

amlmc::ExperimentConfig build_config(const Common& c) {
  amlmc::ExperimentConfig cfg;
  if (!c.config_path.empty()) cfg = amlmc::ExperimentConfig::load(c.config_path);
  if (const char* env = std::getenv("AMLMC_OUT_DIR"); env && *env) cfg.out_dir = env;
  for (const auto& [k, v] : c.overrides) cfg.set(k, v);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multilevel Monte Carlo finite elements"};
  app.require_subcommand(1);

  Common calib_opts, run_opts, dof_opts;
  auto* calibrate = app.add_subcommand("calibrate", "estimate ||eta1|| on T^(1) and print the tolerance schedule");
  add_config_options(calibrate, calib_opts);
  auto* run = app.add_subcommand("run", "error/cost sweep over tol_list, modes and replicas");
  add_config_options(run, run_opts);
  auto* dofscale = app.add_subcommand("dofscale", "maximal unknowns per level over dof_samples pathwise solves");
  add_config_options(dofscale, dof_opts);
  auto* plot = app.add_subcommand("plot", "render SVG plots from the CSV files of a run");
  std::string plot_dir = ".", plot_out;
  plot->add_option("-d,--dir", plot_dir, "directory holding the CSV files");
  plot->add_option("-o,--out", plot_out, "output directory (defaults to --dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*calibrate) {
      auto cfg = build_config(calib_opts);
      amlmc::CalibrationResult cal;
      const auto schedule = amlmc::make_schedule(cfg, &cal);
      std::filesystem::create_directories(cfg.out_dir);
      amlmc::write_json(std::filesystem::path(cfg.out_dir) / "calibration.json", amlmc::to_json(cal, true));
      std::cout << "eta1_norm=" << amlmc::format_number(schedule.eta1_norm) << '\n'
                << "standard_error=" << amlmc::format_number(cal.standard_error) << '\n'
                << "tol1=" << amlmc::format_number(schedule.tol1()) << '\n';
      for (int l = 1; l <= 8; ++l) {
        std::cout << "level " << l << " tol=" << amlmc::format_number(schedule.tol(l))
                  << " eta_threshold=" << amlmc::format_number(schedule.eta_threshold(l)) << '\n';
      }
      return 0;
    }
    if (*run) {
      auto cfg = build_config(run_opts);
      const auto result = amlmc::run_experiment(cfg, &std::cout);
      std::cout << (result.all_met ? "all runs met their tolerance\n" : "some runs exceeded their tolerance\n");
      return result.all_met ? 0 : 1;
    }
    if (*dofscale) {
      auto cfg = build_config(dof_opts);
      const auto schedule = amlmc::make_schedule(cfg);
      amlmc::PathwiseConfig pc;
      pc.theta = cfg.effective_theta();
      pc.solver.sigma_alg = cfg.sigma_alg;
      pc.solver.mode = cfg.solver;
      pc.max_refinements = cfg.max_refinements;
      const auto mode = cfg.modes.size() == 1 ? cfg.modes.front() : amlmc::RefinementMode::adaptive;
      pc.mode = mode;
      const auto r = amlmc::dof_scaling_study(cfg.family(), schedule, mode, cfg.dof_levels, cfg.dof_samples,
                                              cfg.seed, pc);
      std::filesystem::create_directories(cfg.out_dir);
      amlmc::write_dof_scaling(cfg.out_dir, r);
      for (std::size_t l = 0; l < r.max_dofs.size(); ++l) {
        std::cout << "level " << l + 1 << " max_N=" << r.max_dofs[l] << " mean_N=" << r.mean_dofs[l] << '\n';
      }
      std::cout << "slope=" << r.fit.slope << " expected=" << r.expected_slope << '\n';
      return 0;
    }
    if (*plot) {
      const auto outcome = amlmc::plot_directory(plot_dir, plot_out.empty() ? plot_dir : plot_out);
      std::cout << outcome.message << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
