#include "amlmc/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace amlmc {

std::string to_string(Benchmark b) { return b == Benchmark::poisson ? "poisson" : "obstacle"; }

Benchmark parse_benchmark(const std::string& name) {
  if (name == "poisson") return Benchmark::poisson;
  if (name == "obstacle") return Benchmark::obstacle;
  throw std::invalid_argument("unknown benchmark '" + name + "'");
}

ProblemSample poisson_at(std::array<double, 2> y, double beta, double data_scale) {
  if (!(beta > 0.0)) throw std::invalid_argument("poisson: beta must be positive");
  ProblemSample s;
  s.benchmark = Benchmark::poisson;
  s.dimension = 2;
  s.y = y;
  s.beta = beta;
  s.unit_coefficient = true;
  const double y1 = y[0], y2 = y[1], c = data_scale;
  auto u = [=](const Point& x) {
    const double d1 = x[0] - y1, d2 = x[1] - y2;
    return c * std::exp(-beta * (d1 * d1 + d2 * d2));
  };
  s.coefficient = [](const Point&) { return 1.0; };
  // -Laplace u = (4 beta - 4 beta^2 |x-Y|^2) u.
  s.source = [=](const Point& x) {
    const double d1 = x[0] - y1, d2 = x[1] - y2;
    const double rr = d1 * d1 + d2 * d2;
    return c * std::exp(-beta * rr) * (4.0 * beta - 4.0 * beta * beta * rr);
  };
  s.boundary = u;
  s.exact = u;
  s.exact_gradient = [=](const Point& x) {
    const double d1 = x[0] - y1, d2 = x[1] - y2;
    const double v = -2.0 * beta * c * std::exp(-beta * (d1 * d1 + d2 * d2));
    return Point{v * d1, v * d2};
  };
  return s;
}

ProblemSample obstacle_at(std::array<double, 2> y, double data_scale) {
  ProblemSample s;
  s.benchmark = Benchmark::obstacle;
  s.dimension = 1;
  s.y = y;
  const double y1 = y[0], y2 = y[1];
  const double r = 0.7 + (y1 + y2) / 10.0;
  const double e2 = std::exp(2.0 * (y1 + y2)) * data_scale;
  s.r = r;
  s.unit_coefficient = false;

  auto alpha = [=](double x) {
    const double t = x * x;
    return 1.0 + std::cos(t) * y1 / 10.0 + std::sin(t) * y2 / 10.0;
  };
  // alpha'(x) = 2x * slope(x)
  auto slope = [=](double x) {
    const double t = x * x;
    return (-std::sin(t) * y1 + std::cos(t) * y2) / 10.0;
  };
  auto u = [=](const Point& p) {
    const double x = p[0];
    if (x <= r) return 0.0;
    const double w = x * x - r * r;
    return e2 * w * w;
  };
  s.coefficient = [=](const Point& p) { return alpha(p[0]); };
  s.source = [=](const Point& p) {
    const double x = p[0], xx = x * x, rr = r * r;
    if (x > r) return -4.0 * e2 * (alpha(x) * (3.0 * xx - rr) + 2.0 * slope(x) * xx * (xx - rr));
    return 4.0 * rr * e2 * (alpha(x) * (-1.0 - rr + xx) + (-2.0 - 2.0 * rr + xx) * xx * slope(x));
  };
  s.boundary = u;
  s.obstacle = [](const Point&) { return 0.0; };
  s.exact = u;
  s.exact_gradient = [=](const Point& p) {
    const double x = p[0];
    if (x <= r) return Point{0.0, 0.0};
    return Point{4.0 * e2 * x * (x * x - r * r), 0.0};
  };
  return s;
}

namespace {

std::array<double, 2> uniform_parameters(const SeedPath& seed, double half_width) {
  const auto u = uniform_pair(seed);
  return {half_width * (2.0 * u[0] - 1.0), half_width * (2.0 * u[1] - 1.0)};
}

}  // namespace

ProblemSample sample_poisson(const SeedPath& seed, double beta) {
  return poisson_at(uniform_parameters(seed, 0.25), beta);
}

ProblemSample sample_obstacle(const SeedPath& seed) {
  return obstacle_at(uniform_parameters(seed, 1.0));
}

ProblemFamily::ProblemFamily(Benchmark b, double beta) : benchmark_(b), beta_(beta) {
  if (b == Benchmark::poisson) {
    if (!(beta > 0.0)) throw std::invalid_argument("poisson: beta must be positive");
    initial_mesh_ = refine_uniform(Mesh::from_partition(InitialPartition::square_two_triangles()), 4);
  } else {
    initial_mesh_ = Mesh::from_partition(InitialPartition::interval(0.0, 1.0, 16));
  }
}

ProblemFamily ProblemFamily::poisson(double beta) { return ProblemFamily(Benchmark::poisson, beta); }
ProblemFamily ProblemFamily::obstacle() { return ProblemFamily(Benchmark::obstacle, 0.0); }

std::array<double, 2> ProblemFamily::draw(const SeedPath& seed) const {
  if (point_mass_) return *point_mass_;
  return uniform_parameters(seed, y_half_width());
}

ProblemSample ProblemFamily::sample_at(std::array<double, 2> y) const {
  return benchmark_ == Benchmark::poisson ? poisson_at(y, beta_, data_scale_)
                                          : obstacle_at(y, data_scale_);
}

}  // namespace amlmc
