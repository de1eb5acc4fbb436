#pragma once

#include <stdexcept>

#include "amlmc/fem.hpp"
#include "amlmc/problems.hpp"
#include "amlmc/quadrature.hpp"

namespace amlmc {

/// Parameter quadrature did not self-converge; raise the resolution.
class ReferenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// E[u] and its gradient at arbitrary points, integrating the closed-form
/// pathwise solution over the parameter distribution with Gauss-Legendre
/// rules.  Poisson factorizes into two 1D integrals; the obstacle solution
/// depends on Y1+Y2 only and is integrated against its triangular density,
/// split at the density kink and at the free-boundary kink.
class ExpectedSolution {
public:
  explicit ExpectedSolution(const ProblemFamily& family, int resolution = 64);

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  ScalarField value_field() const;
  VectorField gradient_field() const;
  int resolution() const { return resolution_; }

private:
  // Poisson: 1D factor and its derivative.
  std::pair<double, double> poisson_factor(double t) const;
  // Obstacle: (E[u], d/dx E[u]).
  std::pair<double, double> obstacle_moments(double x) const;

  Benchmark benchmark_;
  double beta_;
  double scale_;
  std::optional<std::array<double, 2>> point_mass_;
  int resolution_;
  GaussLegendre gl_;
};

/// Nodal values of E[u] on a mesh.
struct ReferenceExpectation {
  MeshPtr mesh;
  Vector values;
  int resolution = 0;

  FeFunction function() const { return {mesh, values}; }
};

/// Tensor Gauss-Legendre quadrature over (Y1,Y2) with `resolution` nodes per
/// direction (the obstacle's Y1 range is cut at the free-boundary kink).
/// Throws ReferenceError unless resolution and 2*resolution agree to 1e-6
/// relative.
ReferenceExpectation reference_expectation(const ProblemFamily& family, const MeshPtr& mesh,
                                           int resolution = 64);

/// ||E[u] - estimate|| in the requested norm (full H^1 by default), with the
/// element rule applied on every leaf of the estimate's mesh.
double reference_error(const FeFunction& estimate, const ExpectedSolution& expected,
                       NormKind kind = NormKind::full_h1);

}  // namespace amlmc
