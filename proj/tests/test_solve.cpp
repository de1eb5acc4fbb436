#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <random>

#include "amlmc/fem.hpp"
#include "amlmc/problems.hpp"
#include "amlmc/solve.hpp"
#include "support.hpp"

using namespace amlmc;
using testing::constant;
using testing::custom_sample;
using testing::interval_mesh;
using testing::square_mesh;

namespace {

// 1D system on n+1 equispaced vertices with the given free-block matrix
// stencil; boundary vertices carry Dirichlet value 0.
DiscreteSystem laplace_system(int n, const std::vector<double>& load, std::optional<Vector> lower) {
  const auto mesh = interval_mesh(0, 1, n);
  auto sys = assemble(custom_sample(1, constant(1), constant(0), constant(0), true), mesh);
  sys.b = Vector::Zero(n + 1);
  for (int i = 1; i < n; ++i) sys.b[i] = load[i - 1];
  sys.lower = std::move(lower);
  return sys;
}

// Exhaustive active-set oracle: the unique set S of free vertices with
// u = psi on S, (Au)_i = b_i elsewhere, u >= psi and Au - b >= 0.
Vector enumerate_active_sets(const DiscreteSystem& sys) {
  const int n = static_cast<int>(sys.size());
  const Eigen::MatrixXd A = Eigen::MatrixXd(sys.A);
  std::vector<int> free;
  for (int i = 0; i < n; ++i) {
    if (!sys.dirichlet[i]) free.push_back(i);
  }
  const int f = static_cast<int>(free.size());
  const Vector& psi = *sys.lower;
  Vector found;
  int hits = 0;
  for (int mask = 0; mask < (1 << f); ++mask) {
    Vector u = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (sys.dirichlet[i]) u[i] = sys.dirichlet_values[i];
    }
    std::vector<int> inactive;
    for (int k = 0; k < f; ++k) {
      if (mask >> k & 1) {
        u[free[k]] = psi[free[k]];
      } else {
        inactive.push_back(free[k]);
      }
    }
    const int m = static_cast<int>(inactive.size());
    if (m) {
      Eigen::MatrixXd K(m, m);
      Vector rhs(m);
      for (int a = 0; a < m; ++a) {
        rhs[a] = sys.b[inactive[a]];
        for (int j = 0; j < n; ++j) {
          bool is_inactive = false;
          for (int c = 0; c < m; ++c) is_inactive |= inactive[c] == j;
          if (!is_inactive) rhs[a] -= A(inactive[a], j) * u[j];
        }
        for (int c = 0; c < m; ++c) K(a, c) = A(inactive[a], inactive[c]);
      }
      const Vector x = K.ldlt().solve(rhs);
      for (int a = 0; a < m; ++a) u[inactive[a]] = x[a];
    }
    const Vector res = A * u - sys.b;
    bool ok = true;
    for (int k = 0; k < f; ++k) {
      const int i = free[k];
      if (mask >> k & 1) {
        ok &= res[i] >= -1e-12;
      } else {
        ok &= u[i] >= psi[i] - 1e-12;
      }
    }
    if (ok) {
      found = u;
      ++hits;
    }
  }
  REQUIRE(hits >= 1);
  return found;
}

// Plain PGS may need more than the default 10 N sweeps at oracle accuracy.
SolverConfig tight(SolverMode mode = SolverMode::pgs_multigrid) {
  SolverConfig c;
  c.mode = mode;
  c.max_iterations = 100000;
  return c;
}

}  // namespace

TEST_CASE("stopping threshold") {
  SolverConfig c;
  CHECK(stopping_threshold(2.0, c) == doctest::Approx(1e-3 * 2.0 / (2 * std::sqrt(2.0))));
}

TEST_CASE("single free vertex with negative load stays on the obstacle") {
  auto sys = laplace_system(2, {-1.0}, Vector::Zero(3));
  const auto r = solve_obstacle(sys, FeFunction::zero(sys.mesh), 1e-6, tight());
  CHECK(r.converged);
  CHECK(r.solution.values[1] == 0.0);
  CHECK(sys.b[1] - (sys.A * r.solution.values)[1] <= 0.0);
}

TEST_CASE("negative load pins every vertex to the obstacle") {
  auto sys = laplace_system(4, {-1, -1, -1}, Vector::Zero(5));
  const auto r = solve_obstacle(sys, FeFunction::zero(sys.mesh), 1e-6, tight());
  CHECK(r.converged);
  CHECK(r.solution.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mixed load on five vertices matches the active-set oracle") {
  auto sys = laplace_system(4, {1.0, -3.0, 0.5}, Vector::Zero(5));
  const Vector oracle = enumerate_active_sets(sys);
  for (auto mode : {SolverMode::pgs, SolverMode::pgs_multigrid}) {
    const auto r = solve_obstacle(sys, FeFunction::zero(sys.mesh), 1e-9, tight(mode));
    CHECK(r.converged);
    CHECK((r.solution.values - oracle).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("random small obstacle systems match the active-set oracle") {
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int free = 1 + trial % 8;
    const int n = free + 1;
    const auto mesh = interval_mesh(0, 1, n);
    const double c0 = 1.0 + 0.5 * U(gen), c1 = 0.3 * U(gen);
    auto sys = assemble(custom_sample(1, [=](const Point& x) { return c0 + c1 * x[0]; },
                                      [&](const Point&) { return 0.0; }, constant(0), false),
                        mesh);
    for (int i = 0; i <= n; ++i) sys.b[i] = 4.0 * U(gen);
    Vector psi(n + 1);
    for (int i = 0; i <= n; ++i) psi[i] = 0.2 * U(gen) - (sys.dirichlet[i] ? 1.0 : 0.0);
    sys.lower = psi;
    const Vector oracle = enumerate_active_sets(sys);
    for (auto mode : {SolverMode::pgs, SolverMode::pgs_multigrid}) {
      const auto r = solve_obstacle(sys, FeFunction::zero(mesh), 1e-9, tight(mode));
      CHECK(r.converged);
      CHECK((r.solution.values - oracle).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("identity matrix is solved by one sweep") {
  const auto mesh = interval_mesh(0, 1, 4);
  auto sys = assemble(custom_sample(1, constant(1), constant(0), constant(0), true), mesh);
  SparseMatrix I(5, 5);
  I.setIdentity();
  sys.A = I;
  sys.b = Vector::LinSpaced(5, 1.0, 5.0);
  for (int i = 0; i < 5; ++i) {
    if (sys.dirichlet[i]) sys.dirichlet_values[i] = sys.b[i];
  }
  SolverConfig c = tight(SolverMode::pgs);
  c.max_iterations = 1;
  const auto r = solve_linear(sys, FeFunction::zero(mesh), 1.0, c);
  CHECK((r.solution.values - sys.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two free vertices match direct elimination") {
  const auto mesh = interval_mesh(0, 1, 3);
  auto sys = assemble(custom_sample(1, constant(2), constant(0), constant(0), false), mesh);
  sys.dirichlet_values[0] = 1.0;  // Dirichlet vertices keep their value
  sys.b = Vector::Zero(4);
  sys.b[1] = 0.7;
  sys.b[2] = -0.2;
  const Eigen::MatrixXd A(sys.A);
  // [a11 a12; a21 a22] x = b - A_{:,0} g
  const double r1 = sys.b[1] - A(1, 0) * 1.0, r2 = sys.b[2] - A(2, 0) * 1.0;
  const double det = A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1);
  const double x1 = (r1 * A(2, 2) - A(1, 2) * r2) / det;
  const double x2 = (A(1, 1) * r2 - A(2, 1) * r1) / det;
  const auto r = solve_linear(sys, FeFunction::zero(mesh), 1e-12, tight());
  CHECK(r.solution.values[1] == doctest::Approx(x1).epsilon(1e-12));
  CHECK(r.solution.values[2] == doctest::Approx(x2).epsilon(1e-12));
  CHECK(r.solution.values[0] == 1.0);
}

TEST_CASE("Poisson sample matches a direct sparse factorization") {
  const auto s = poisson_at({0.12, -0.07}, 10);
  const auto mesh = square_mesh(4);
  const auto sys = assemble(s, mesh);
  const auto r = solve_linear(sys, FeFunction::zero(mesh), 1e-9, tight());
  REQUIRE(r.converged);

  std::vector<int> idx(sys.size(), -1);
  int m = 0;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (!sys.dirichlet[i]) idx[i] = m++;
  }
  Eigen::SparseMatrix<double> K(m, m);
  Vector rhs = Vector::Zero(m);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (idx[i] < 0) continue;
    rhs[idx[i]] = sys.b[i];
    for (SparseMatrix::InnerIterator it(sys.A, i); it; ++it) {
      if (idx[it.col()] >= 0) {
        t.emplace_back(idx[i], idx[it.col()], it.value());
      } else {
        rhs[idx[i]] -= it.value() * sys.dirichlet_values[it.col()];
      }
    }
  }
  K.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  const Vector x = ldlt.solve(rhs);
  const Vector res = sys.A * r.solution.values - sys.b;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (idx[i] < 0) continue;
    CHECK(std::abs(res[i]) <= 1e-8 * sys.b.norm());
    CHECK(r.solution.values[i] == doctest::Approx(x[idx[i]]).epsilon(1e-7));
  }
}

TEST_CASE("iterates stay feasible and the energy does not increase") {
  for (auto mode : {SolverMode::pgs, SolverMode::pgs_multigrid}) {
    const auto s = obstacle_at({0.4, -0.9});
    const auto mesh = refine_uniform(interval_mesh(0, 1, 16), 2);
    const auto sys = assemble(s, mesh);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 15; ++k) {
      SolverConfig c = tight(mode);
      c.max_iterations = k;
      const auto r = solve_obstacle(sys, FeFunction::zero(mesh), 1e-14, c);
      for (std::size_t i = 0; i < sys.size(); ++i) CHECK(r.solution.values[i] >= (*sys.lower)[i]);
      const double e = quadratic_energy(sys, r.solution.values);
      CHECK(e <= prev + 1e-14 * std::abs(prev));
      prev = e;
    }
  }
}

TEST_CASE("unconstrained obstacle solve equals the linear solve") {
  const auto s = poisson_at({0.0, 0.1}, 50);
  const auto mesh = refine_marked(square_mesh(3), {0, 1, 2});
  auto sys = assemble(s, mesh);
  const auto lin = solve_linear(sys, FeFunction::zero(mesh), 1e-6, tight());
  sys.lower = Vector::Constant(sys.size(), -std::numeric_limits<double>::infinity());
  const auto obs = solve_obstacle(sys, FeFunction::zero(mesh), 1e-6, tight());
  CHECK(lin.iterations == obs.iterations);
  CHECK((lin.solution.values - obs.solution.values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("complementarity on benchmark solves") {
  for (double y1 : {-0.8, 0.1, 0.9}) {
    const auto s = obstacle_at({y1, -0.3});
    for (int k : {0, 3, 6}) {
      const auto mesh = refine_uniform(interval_mesh(0, 1, 16), k);
      const auto sys = assemble(s, mesh);
      const auto r = solve_obstacle(sys, FeFunction::zero(mesh), 1e-10, tight());
      REQUIRE(r.converged);
      const Vector& u = r.solution.values;
      const Vector res = sys.A * u - sys.b;
      Eigen::VectorXd rowsum = sys.A.cwiseAbs() * Vector::Ones(sys.size());
      const double eps = 1e-8 * (rowsum.maxCoeff() * u.cwiseAbs().maxCoeff() + sys.b.cwiseAbs().maxCoeff());
      for (std::size_t i = 0; i < sys.size(); ++i) {
        if (sys.dirichlet[i]) continue;
        const double psi = (*sys.lower)[i];
        CHECK(u[i] >= psi);
        CHECK(res[i] >= -eps);
        CHECK((u[i] - psi) * res[i] <= eps);
      }
    }
  }
}

TEST_CASE("non-convergence is reported") {
  const auto mesh = square_mesh(4);
  const auto sys = assemble(poisson_at({0, 0}, 10), mesh);
  SolverConfig c = tight(SolverMode::pgs);
  c.max_iterations = 2;
  const auto r = solve_linear(sys, FeFunction::zero(mesh), 1e-6, c);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
}
