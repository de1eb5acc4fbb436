#include "amlmc/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "amlmc/multigrid.hpp"

namespace amlmc {

SolverMode parse_solver_mode(const std::string& name) {
  if (name == "pgs") return SolverMode::pgs;
  if (name == "pgs_multigrid") return SolverMode::pgs_multigrid;
  throw std::invalid_argument("unknown solver mode '" + name + "'");
}

double stopping_threshold(double level_tol, const SolverConfig& cfg) {
  return cfg.sigma_alg * level_tol / (2.0 * std::sqrt(2.0));
}

double quadratic_energy(const DiscreteSystem& system, const Vector& u) {
  return 0.5 * u.dot(system.A * u) - system.b.dot(u);
}

namespace {

// One projected Gauss-Seidel sweep over the free vertices.
void projected_sweep(const DiscreteSystem& sys, const Vector& diag, const Vector* lower, Vector& u,
                     bool forward) {
  const auto n = static_cast<Eigen::Index>(sys.size());
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index i = forward ? s : n - 1 - s;
    if (sys.dirichlet[i]) continue;
    double res = sys.b[i];
    for (SparseMatrix::InnerIterator it(sys.A, i); it; ++it) res -= it.value() * u[it.col()];
    double v = u[i] + res / diag[i];
    if (lower) v = std::max(v, (*lower)[i]);
    u[i] = v;
  }
}

SolveResult run(const DiscreteSystem& sys, const FeFunction& initial, double level_tol,
                const SolverConfig& cfg) {
  if (!(level_tol > 0.0)) throw std::invalid_argument("solve: level tolerance must be positive");
  if (!(cfg.sigma_alg > 0.0 && cfg.sigma_alg <= 1.0)) throw std::invalid_argument("solve: sigma_alg outside (0,1]");
  if (initial.mesh != sys.mesh && !initial.mesh->same_forest(*sys.mesh)) {
    throw std::invalid_argument("solve: initial iterate lives on another mesh");
  }
  const auto n = static_cast<Eigen::Index>(sys.size());
  const Vector* lower = sys.lower ? &*sys.lower : nullptr;
  const Vector diag = sys.A.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!sys.dirichlet[i] && !(diag[i] > 0.0)) throw std::runtime_error("solve: non-positive diagonal");
  }

  Vector u = initial.values;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sys.dirichlet[i]) {
      u[i] = sys.dirichlet_values[i];
    } else if (lower) {
      u[i] = std::max(u[i], (*lower)[i]);
    }
  }

  const double threshold = stopping_threshold(level_tol, cfg);
  const std::size_t max_it = cfg.max_iterations ? cfg.max_iterations : 10 * sys.size();
  const SparseMatrix& H = sys.seminorm_matrix();
  const bool multigrid = cfg.mode == SolverMode::pgs_multigrid;

  std::unique_ptr<MultigridHierarchy> mg;
  std::vector<char> truncated(n, 0), previous;
  if (multigrid) mg = std::make_unique<MultigridHierarchy>(*sys.mesh);

  SolveResult result;
  result.last_increment = std::numeric_limits<double>::infinity();
  Vector before(n), r(n), d(n);
  for (std::size_t it = 0; it < max_it; ++it) {
    before = u;
    for (int s = 0; s < cfg.smoothing_steps; ++s) projected_sweep(sys, diag, lower, u, true);
    if (multigrid) {
      for (Eigen::Index i = 0; i < n; ++i) {
        truncated[i] = sys.dirichlet[i] || (lower && u[i] <= (*lower)[i]);
      }
      if (truncated != previous) {
        mg->setup(sys.A, truncated);
        previous = truncated;
      }
      r = sys.b - sys.A * u;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (sys.dirichlet[i]) r[i] = 0.0;
      }
      const Vector c = mg->vcycle(r, cfg.smoothing_steps);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double target = lower ? std::max(u[i] + c[i], (*lower)[i]) : u[i] + c[i];
        d[i] = sys.dirichlet[i] ? 0.0 : target - u[i];
      }
      const double curvature = d.dot(sys.A * d);
      if (curvature > 0.0) {
        const double lambda = std::clamp(r.dot(d) / curvature, 0.0, 1.0);
        u += lambda * d;
      }
      for (int s = 0; s < cfg.smoothing_steps; ++s) projected_sweep(sys, diag, lower, u, false);
    }
    const Vector delta = u - before;
    result.last_increment = std::sqrt(std::max(0.0, delta.dot(H * delta)));
    result.iterations = it + 1;
    if (result.last_increment <= threshold) {
      result.converged = true;
      break;
    }
  }
  result.solution = {sys.mesh, std::move(u)};
  return result;
}

}  // namespace

SolveResult solve_obstacle(const DiscreteSystem& system, const FeFunction& initial, double level_tol,
                           const SolverConfig& cfg) {
  return run(system, initial, level_tol, cfg);
}

SolveResult solve_linear(const DiscreteSystem& system, const FeFunction& initial, double level_tol,
                         const SolverConfig& cfg) {
  if (system.constrained()) throw std::invalid_argument("solve_linear: system carries an obstacle");
  return run(system, initial, level_tol, cfg);
}

SolveResult solve(const DiscreteSystem& system, const FeFunction& initial, double level_tol,
                  const SolverConfig& cfg) {
  return run(system, initial, level_tol, cfg);
}

}  // namespace amlmc
