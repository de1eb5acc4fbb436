#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amlmc/estimate.hpp"
#include "amlmc/fem.hpp"
#include "amlmc/problems.hpp"
#include "amlmc/solve.hpp"

namespace amlmc {

enum class RefinementMode { uniform, adaptive };
enum class Allocation { giles, theoretical };

std::string to_string(RefinementMode m);
RefinementMode parse_refinement_mode(const std::string& name);
std::string to_string(Allocation a);
Allocation parse_allocation(const std::string& name);

/// Tol_l = q^{l-1} Tol_1 with Tol_1 = 2 sqrt(2) C_est ||eta^(1)||.  The
/// adaptive stopping criterion on level l is eta <= q^{l-1} ||eta^(1)||.
struct ToleranceSchedule {
  double eta1_norm = 1.0;
  double q = 0.5;
  double c_est = 1.0;
  int levels = 1;

  static ToleranceSchedule from_eta1(double eta1_norm, double q = 0.5, double c_est = 1.0);

  double tol1() const;
  double tol(int level) const;
  double eta_threshold(int level) const;
  /// Smallest L with Tol_L <= tol.
  int levels_for(double tol) const;
};

struct CalibrationResult {
  double eta1_norm = 0.0;
  double standard_error = 0.0;  // of the mean of eta^2, propagated to the norm
  std::vector<double> eta;
};

/// ||eta^(1)||_{L^2(Omega)} from n solves on T^(1).
CalibrationResult calibrate_tol1(const ProblemFamily& family, std::uint64_t seed, int n_samples = 1000,
                                 const SolverConfig& solver = {}, double solver_tol = 1e-8);

class PathwiseFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PathwiseConfig {
  RefinementMode mode = RefinementMode::adaptive;
  double theta = 0.4;
  SolverConfig solver;
  int max_refinements = 80;
};

/// State of an adaptive run at the first mesh meeting one threshold.
struct AdaptiveStop {
  FeFunction solution;
  double eta = 0.0;
  int steps = 0;
};

/// Adaptive loop (solve, estimate, mark, refine) from `initial`, recording
/// the first iterate meeting each of the descending `thresholds`.  While
/// working towards threshold k the solver uses level tolerance
/// solver_tols[k].
std::vector<AdaptiveStop> adaptive_trajectory(const ProblemSample& sample, const MeshPtr& initial,
                                              const std::vector<double>& thresholds,
                                              const std::vector<double>& solver_tols,
                                              const PathwiseConfig& cfg);

/// Uniform meshes T^(1) refined l-1 times, built on demand.
class UniformLevels {
public:
  explicit UniformLevels(MeshPtr initial) : meshes_{std::move(initial)} {}
  const MeshPtr& level(int l);

private:
  std::vector<MeshPtr> meshes_;
};

struct PathwiseResult {
  int level = 1;
  std::uint64_t sample = 0;
  FeFunction fine;
  std::optional<FeFunction> coarse;
  int steps = 0;  // k_l(omega); zero in uniform mode
  std::size_t fine_dofs = 0;
  std::size_t coarse_dofs = 0;
  double eta = 0.0;  // final estimator value (adaptive mode)

  std::size_t cost() const { return fine_dofs + coarse_dofs; }
  /// u_l - u_{l-1} on the fine mesh (u_1 at level 1).
  FeFunction difference() const;
};

PathwiseResult pathwise_solve(const ProblemFamily& family, const SeedPath& seed,
                              const ToleranceSchedule& schedule, const PathwiseConfig& cfg,
                              UniformLevels* uniform = nullptr);

/// Sample mean on the union mesh of all inputs.
FeFunction mc_mean(const std::vector<FeFunction>& samples);

/// Unbiased sample variance 1/(M-1) sum ||v_i - mean||_H^2.
double variance_estimate(const std::vector<FeFunction>& samples, const FeFunction& mean);

/// Sum of functions from one mesh family, prolonged to their union.
FeFunction add_functions(const FeFunction& a, const FeFunction& b, double scale_b = 1.0);

/// Running per-level moments.  Values live on the union mesh of every sample
/// added so far.
class LevelStats {
public:
  explicit LevelStats(int level = 1) : level_(level) {}

  void add(const PathwiseResult& r);
  void add_difference(const FeFunction& v, std::size_t cost, std::size_t fine_dofs, int steps = 0);

  int level() const { return level_; }
  std::size_t samples() const { return samples_; }
  FeFunction mean() const;
  /// (sum ||v_i||^2 - M ||mean||^2)/(M-1), clipped at zero.
  double variance() const;
  double average_cost() const;
  double average_fine_dofs() const;
  std::size_t max_fine_dofs() const { return max_fine_dofs_; }
  std::uint64_t fine_dof_sum() const { return fine_dof_sum_; }
  std::uint64_t cost_sum() const { return cost_sum_; }
  double average_steps() const;
  const MeshPtr& union_mesh() const { return sum_.mesh; }

private:
  int level_;
  std::size_t samples_ = 0;
  FeFunction sum_;
  double sum_sq_ = 0.0;
  std::uint64_t cost_sum_ = 0;
  std::uint64_t fine_dof_sum_ = 0;
  std::size_t max_fine_dofs_ = 0;
  std::uint64_t steps_sum_ = 0;
};

/// Sample counts M_1..M_L from the complexity bounds (L = schedule.levels) with work
/// exponent s and V[u] = vu; Tol = Tol_L.
std::vector<std::int64_t> allocate_theoretical(const ToleranceSchedule& schedule, double s, double vu);

/// M_l = max(m_min, ceil(2 Tol^-2 sqrt(V_l/C_l) sum_k sqrt(V_k C_k))).
std::vector<std::int64_t> allocate_giles(const std::vector<double>& variance, const std::vector<double>& cost,
                                         double tol, std::int64_t m_min);

struct MlmcConfig {
  RefinementMode mode = RefinementMode::adaptive;
  Allocation allocation = Allocation::giles;
  double theta = 0.4;
  SolverConfig solver;
  std::int64_t m_min = 100;
  int initial_levels = 2;
  int max_levels = 12;
  int max_refinements = 80;
  double work_exponent = 2.0;  // s, theoretical allocation only
  std::uint64_t seed = 1;
  int replica = 0;
};

struct LevelSummary {
  int level = 1;
  std::int64_t samples = 0;
  std::int64_t optimal_samples = 0;  // last allocation, may be below M_min
  double variance = 0.0;
  double average_cost = 0.0;  // fine + coarse dofs per sample
  double average_dofs = 0.0;  // fine dofs per sample
  std::size_t max_dofs = 0;
  std::uint64_t dof_sum = 0;
  double average_steps = 0.0;
  std::size_t union_vertices = 0;
  double mean_norm = 0.0;  // ||E_M[u_l - u_{l-1}]||_H
};

struct MlmcReport {
  FeFunction estimate;
  std::vector<LevelSummary> levels;
  ToleranceSchedule schedule;
  double tol = 0.0;
  /// sum_l sum_i N_{l,i}: fine dofs of every sample.
  std::uint64_t cost = 0;
  /// Including the coarse member of each pair.
  std::uint64_t pair_cost = 0;
  double bias_estimate = 0.0;
  double statistical_error = 0.0;  // sqrt(sum V_l / M_l)
  std::string termination;
  RefinementMode mode = RefinementMode::adaptive;
  Allocation allocation = Allocation::giles;
  std::uint64_t seed = 0;
  int replica = 0;
};

class MlmcFailure : public std::runtime_error {
public:
  MlmcFailure(const std::string& what, MlmcReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const MlmcReport& report() const { return report_; }

private:
  MlmcReport report_;
};

MlmcReport run_mlmc(const ProblemFamily& family, double tol, const ToleranceSchedule& schedule,
                    const MlmcConfig& cfg);

}  // namespace amlmc
