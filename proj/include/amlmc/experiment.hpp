#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amlmc/mlmc.hpp"
#include "amlmc/problems.hpp"
#include "amlmc/report.hpp"

namespace amlmc {

/// Flat key=value experiment description.  Keys are listed in docs/config.md;
/// zero for m_min or theta selects the benchmark default.
struct ExperimentConfig {
  Benchmark benchmark = Benchmark::poisson;
  double beta = 10.0;
  std::vector<RefinementMode> modes{RefinementMode::uniform, RefinementMode::adaptive};
  std::vector<double> tol_list;
  int replicas = 5;
  std::uint64_t seed = 1;
  std::int64_t m_min = 0;
  double theta = 0.0;
  double q = 0.5;
  double sigma_alg = 1e-3;
  double c_est = 1.0;
  std::string out_dir = "out";
  Allocation allocation = Allocation::giles;
  SolverMode solver = SolverMode::pgs_multigrid;
  int ref_resolution = 64;
  int calibration_samples = 1000;
  int max_levels = 12;
  int max_refinements = 80;
  int dof_samples = 100;
  int dof_levels = 6;
  /// Pre-set ||eta^(1)|| (skips calibration when positive).
  double eta1_norm = 0.0;
  /// Test hook: every draw returns this Y ("y1,y2"; "none" clears).
  std::optional<std::array<double, 2>> point_mass;

  /// Applies one key=value setting; throws std::invalid_argument on unknown
  /// keys or malformed values.
  void set(const std::string& key, const std::string& value);
  /// Reads '#'-commented key=value lines.
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig load(const std::filesystem::path& path);
  void validate() const;
  /// Canonical key=value listing.
  std::string dump() const;

  ProblemFamily family() const;
  MlmcConfig mlmc_config(RefinementMode mode, int replica) const;
  double effective_theta() const;
  std::int64_t effective_m_min() const;
};

struct RunRow {
  RefinementMode mode = RefinementMode::adaptive;
  double tol = 0.0;
  int replica = 0;
  double error = 0.0;           // full H^1 distance to E[u]
  double seminorm_error = 0.0;  // H seminorm part
  std::uint64_t cost = 0;
  std::uint64_t pair_cost = 0;
  int levels = 0;
  double bias_estimate = 0.0;
  double statistical_error = 0.0;
};

struct ExperimentResult {
  CalibrationResult calibration;
  ToleranceSchedule schedule;
  std::vector<RunRow> rows;
  std::vector<MlmcReport> reports;
  bool all_met = true;
};

/// Calibration or the preset eta1_norm.
ToleranceSchedule make_schedule(const ExperimentConfig& cfg, CalibrationResult* calibration = nullptr);

/// Runs every (mode, Tol, replica), writes errors.csv, samples.csv,
/// costfit.csv, calibration.json, config.txt and one JSON report per run into
/// cfg.out_dir.  A failed MLMC run writes its partial report and rethrows.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ToleranceSchedule& schedule,
                                std::ostream* log = nullptr);

struct DofScalingResult {
  std::vector<std::size_t> max_dofs;  // N_{l,max}, l = 1..levels
  std::vector<double> mean_dofs;
  LinearFit fit;                      // log N_{l,max} against l
  double expected_slope = 0.0;        // d log(1/q)
};

/// Pathwise solves of `samples` random realizations through the stopping
/// thresholds of levels 1..levels (one trajectory per realization).  Uniform
/// mode reports the deterministic mesh sizes.
DofScalingResult dof_scaling_study(const ProblemFamily& family, const ToleranceSchedule& schedule,
                                   RefinementMode mode, int levels, int samples, std::uint64_t seed,
                                   const PathwiseConfig& cfg);

/// Writes dofscaling.csv and dofscaling_fit.csv.
void write_dof_scaling(const std::filesystem::path& dir, const DofScalingResult& r);

}  // namespace amlmc
