#pragma once

#include <cstddef>
#include <string>

#include "amlmc/fem.hpp"

namespace amlmc {

enum class SolverMode { pgs, pgs_multigrid };

SolverMode parse_solver_mode(const std::string& name);

struct SolverConfig {
  double sigma_alg = 1e-3;
  /// 0 selects 10 * N.
  std::size_t max_iterations = 0;
  int smoothing_steps = 1;
  SolverMode mode = SolverMode::pgs_multigrid;
};

struct SolveResult {
  FeFunction solution;
  std::size_t iterations = 0;
  double last_increment = 0.0;
  bool converged = false;
};

/// Increment threshold sigma_alg * level_tol / (2 sqrt 2).
double stopping_threshold(double level_tol, const SolverConfig& cfg);

/// Monotone iteration for min 1/2 u'Au - b'u subject to u >= lower and the
/// Dirichlet values.  Each iteration is a projected Gauss-Seidel sweep,
/// optionally followed by a truncated multigrid correction (Dirichlet and
/// active vertices removed), projection, line search and a backward sweep.
/// Stops once the H seminorm of an iteration's increment is below
/// stopping_threshold(level_tol, cfg).
SolveResult solve_obstacle(const DiscreteSystem& system, const FeFunction& initial, double level_tol,
                           const SolverConfig& cfg);

/// Same iteration without constraint; requires an unconstrained system.
SolveResult solve_linear(const DiscreteSystem& system, const FeFunction& initial, double level_tol,
                         const SolverConfig& cfg);

/// Dispatches on system.constrained().
SolveResult solve(const DiscreteSystem& system, const FeFunction& initial, double level_tol,
                  const SolverConfig& cfg);

/// 1/2 u'Au - b'u.
double quadratic_energy(const DiscreteSystem& system, const Vector& u);

}  // namespace amlmc
