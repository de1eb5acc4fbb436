#pragma once

#include <array>
#include <vector>

namespace amlmc {

/// Quadrature on the reference simplex in barycentric coordinates.  Weights
/// sum to the reference measure (1 for the unit interval, 1/2 for the unit
/// triangle).
struct QuadratureRule {
  int dimension = 1;
  int order = 0;  // exact for polynomials up to this degree
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double reference_measure() const { return dimension == 1 ? 1.0 : 0.5; }
};

/// Order-5 three-point Gauss rule on [0,1].
const QuadratureRule& interval_rule();
/// Order-4 six-point symmetric rule on the triangle.
const QuadratureRule& triangle_rule();
const QuadratureRule& element_rule(int dimension);

/// n-point Gauss-Legendre nodes and weights on [-1,1] (Golub-Welsch free,
/// Newton on the Legendre recurrence).
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

/// Integral of f over [a,b] with the n-point Gauss-Legendre rule.
template <class F>
double integrate(F&& f, double a, double b, const GaussLegendre& gl) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) sum += gl.weights[i] * f(mid + half * gl.nodes[i]);
  return half * sum;
}

}  // namespace amlmc
