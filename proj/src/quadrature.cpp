#include "amlmc/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace amlmc {

const QuadratureRule& interval_rule() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    r.dimension = 1;
    r.order = 5;
    const double s = 0.5 * std::sqrt(0.6);
    for (double t : {0.5 - s, 0.5, 0.5 + s}) r.points.push_back({1.0 - t, t, 0.0});
    r.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    return r;
  }();
  return rule;
}

const QuadratureRule& triangle_rule() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    r.dimension = 2;
    r.order = 4;
    const double a = 0.44594849091596488632, wa = 0.22338158967801146570;
    const double b = 0.09157621350977074346, wb = 0.10995174365532186764;
    for (auto [p, w] : {std::pair{a, wa}, std::pair{b, wb}}) {
      const double q = 1.0 - 2.0 * p;
      r.points.push_back({q, p, p});
      r.points.push_back({p, q, p});
      r.points.push_back({p, p, q});
      for (int k = 0; k < 3; ++k) r.weights.push_back(0.5 * w);
    }
    return r;
  }();
  return rule;
}

const QuadratureRule& element_rule(int dimension) {
  return dimension == 1 ? interval_rule() : triangle_rule();
}

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = gl.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

}  // namespace amlmc
