#include "amlmc/reference.hpp"

#include <algorithm>
#include <cmath>

namespace amlmc {

ExpectedSolution::ExpectedSolution(const ProblemFamily& family, int resolution)
    : benchmark_(family.benchmark()),
      beta_(family.beta()),
      scale_(family.data_scale()),
      point_mass_(family.point_mass()),
      resolution_(resolution),
      gl_(gauss_legendre(resolution)) {
  if (resolution < 8) throw ReferenceError("expected solution: resolution below 8");
}

std::pair<double, double> ExpectedSolution::poisson_factor(double t) const {
  // Y ~ U(-1/4,1/4) has density 2.
  const double beta = beta_;
  double g = 0.0, dg = 0.0;
  const double half = 0.25;
  for (std::size_t i = 0; i < gl_.nodes.size(); ++i) {
    const double y = half * gl_.nodes[i];
    const double d = t - y;
    const double e = std::exp(-beta * d * d);
    g += gl_.weights[i] * e;
    dg += gl_.weights[i] * (-2.0 * beta * d * e);
  }
  // half * 2 (density) = 0.5
  return {0.5 * g, 0.5 * dg};
}

std::pair<double, double> ExpectedSolution::obstacle_moments(double x) const {
  // u = e^{2S} (x^2 - r^2)^2 for S < s_star, with r = 0.7 + S/10 and S = Y1+Y2
  // of density (2 - |S|)/4 on [-2,2].
  const double s_star = 10.0 * (x - 0.7);
  const double upper = std::min(2.0, s_star);
  if (upper <= -2.0) return {0.0, 0.0};
  std::vector<std::pair<double, double>> pieces;
  if (upper <= 0.0) {
    pieces.emplace_back(-2.0, upper);
  } else {
    pieces.emplace_back(-2.0, 0.0);
    pieces.emplace_back(0.0, upper);
  }
  double m = 0.0, dm = 0.0;
  for (auto [a, b] : pieces) {
    m += integrate(
        [&](double s) {
          const double r = 0.7 + s / 10.0;
          const double w = x * x - r * r;
          return (2.0 - std::abs(s)) / 4.0 * std::exp(2.0 * s) * w * w;
        },
        a, b, gl_);
    dm += integrate(
        [&](double s) {
          const double r = 0.7 + s / 10.0;
          return (2.0 - std::abs(s)) / 4.0 * std::exp(2.0 * s) * 4.0 * x * (x * x - r * r);
        },
        a, b, gl_);
  }
  return {scale_ * m, scale_ * dm};
}

double ExpectedSolution::value(const Point& x) const {
  if (point_mass_) {
    const auto s = benchmark_ == Benchmark::poisson ? poisson_at(*point_mass_, beta_, scale_)
                                                    : obstacle_at(*point_mass_, scale_);
    return s.exact(x);
  }
  if (benchmark_ == Benchmark::poisson) {
    return scale_ * poisson_factor(x[0]).first * poisson_factor(x[1]).first;
  }
  return obstacle_moments(x[0]).first;
}

Point ExpectedSolution::gradient(const Point& x) const {
  if (point_mass_) {
    const auto s = benchmark_ == Benchmark::poisson ? poisson_at(*point_mass_, beta_, scale_)
                                                    : obstacle_at(*point_mass_, scale_);
    return s.exact_gradient(x);
  }
  if (benchmark_ == Benchmark::poisson) {
    const auto [g0, dg0] = poisson_factor(x[0]);
    const auto [g1, dg1] = poisson_factor(x[1]);
    return {scale_ * dg0 * g1, scale_ * g0 * dg1};
  }
  return {obstacle_moments(x[0]).second, 0.0};
}

ScalarField ExpectedSolution::value_field() const {
  return [self = *this](const Point& x) { return self.value(x); };
}

VectorField ExpectedSolution::gradient_field() const {
  return [self = *this](const Point& x) { return self.gradient(x); };
}

namespace {

Vector nodal_expectation(const ProblemFamily& family, const Mesh& mesh, int n) {
  const std::size_t nv = mesh.num_vertices();
  Vector values = Vector::Zero(static_cast<Eigen::Index>(nv));
  if (family.point_mass()) {
    const auto s = family.sample_at(*family.point_mass());
    for (std::size_t i = 0; i < nv; ++i) values[i] = s.exact(mesh.vertex(i));
    return values;
  }
  const GaussLegendre gl = gauss_legendre(n);
  const double w = family.y_half_width();
  const double density = 1.0 / (4.0 * w * w);
  if (family.benchmark() == Benchmark::poisson) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto s = family.sample_at({w * gl.nodes[i], w * gl.nodes[j]});
        const double weight = gl.weights[i] * gl.weights[j] * w * w * density;
        for (std::size_t v = 0; v < nv; ++v) values[v] += weight * s.exact(mesh.vertex(v));
      }
    }
    return values;
  }
  // Obstacle: the integrand vanishes for Y1 >= 10(x-0.7) - Y2, so the inner
  // range is cut there and both pieces stay smooth.
  const double scale = family.data_scale();
  for (std::size_t v = 0; v < nv; ++v) {
    const double x = mesh.vertex(v)[0];
    const double s_star = 10.0 * (x - 0.7);
    // The inner upper limit min(1, s_star - y2) has kinks in y2 at s_star -/+ 1.
    std::vector<double> cuts{-1.0};
    for (double c : {s_star - 1.0, s_star + 1.0}) {
      if (c > -1.0 && c < 1.0) cuts.push_back(c);
    }
    cuts.push_back(1.0);
    double sum = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      sum += integrate(
          [&](double y2) {
            const double top = std::min(1.0, s_star - y2);
            if (top <= -1.0) return 0.0;
            return integrate(
                [&](double y1) {
                  const double r = 0.7 + (y1 + y2) / 10.0;
                  const double q = x * x - r * r;
                  return std::exp(2.0 * (y1 + y2)) * q * q;
                },
                -1.0, top, gl);
          },
          cuts[p], cuts[p + 1], gl);
    }
    values[v] = scale * sum * density;
  }
  return values;
}

}  // namespace

ReferenceExpectation reference_expectation(const ProblemFamily& family, const MeshPtr& mesh,
                                           int resolution) {
  if (resolution < 16) throw ReferenceError("reference expectation: resolution below 16");
  Vector coarse = nodal_expectation(family, *mesh, resolution);
  Vector fine = nodal_expectation(family, *mesh, 2 * resolution);
  const double scale = std::max(fine.cwiseAbs().maxCoeff(), 1e-300);
  if ((fine - coarse).cwiseAbs().maxCoeff() > 1e-6 * scale) {
    throw ReferenceError("reference expectation: parameter quadrature not converged");
  }
  return {mesh, std::move(fine), 2 * resolution};
}

double reference_error(const FeFunction& estimate, const ExpectedSolution& expected, NormKind kind) {
  return h1_error(estimate, expected.value_field(), expected.gradient_field(), kind);
}

}  // namespace amlmc
