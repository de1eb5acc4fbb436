#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "amlmc/mesh.hpp"
#include "amlmc/random.hpp"

namespace amlmc {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

enum class Benchmark { poisson, obstacle };

std::string to_string(Benchmark b);
Benchmark parse_benchmark(const std::string& name);

/// One realization omega of a benchmark: data, exact pathwise solution and the
/// parameters it was built from.
struct ProblemSample {
  Benchmark benchmark = Benchmark::poisson;
  int dimension = 2;
  std::array<double, 2> y{0.0, 0.0};
  double beta = 0.0;  // Poisson peak sharpness
  double r = 0.0;     // obstacle free-boundary location

  /// alpha == 1 everywhere; lets the assembler reuse the stiffness matrix as
  /// the Gram matrix of the H seminorm.
  bool unit_coefficient = true;
  ScalarField coefficient;
  ScalarField source;
  ScalarField boundary;  // Dirichlet datum, evaluated at boundary vertices
  /// Lower bound for the admissible set; empty when unconstrained.
  ScalarField obstacle;

  ScalarField exact;
  VectorField exact_gradient;

  bool constrained() const { return static_cast<bool>(obstacle); }
};

/// Poisson sample on (-1,1)^2: u = exp(-beta |x-Y|^2), alpha = 1, g = u on the
/// boundary, Y ~ U(-1/4,1/4)^2.
ProblemSample sample_poisson(const SeedPath& seed, double beta);
ProblemSample poisson_at(std::array<double, 2> y, double beta, double data_scale = 1.0);

/// Obstacle sample on (0,1): u = max((x^2-r^2) e^{Y1+Y2}, 0)^2 above the zero
/// obstacle, Y ~ U(-1,1)^2.
ProblemSample sample_obstacle(const SeedPath& seed);
ProblemSample obstacle_at(std::array<double, 2> y, double data_scale = 1.0);

/// A benchmark together with its parameters and the coarse mesh T^(1).
class ProblemFamily {
public:
  static ProblemFamily poisson(double beta);
  static ProblemFamily obstacle();

  Benchmark benchmark() const { return benchmark_; }
  double beta() const { return beta_; }
  int dimension() const { return benchmark_ == Benchmark::poisson ? 2 : 1; }
  /// Half width of the uniform distribution of each Y component.
  double y_half_width() const { return benchmark_ == Benchmark::poisson ? 0.25 : 1.0; }

  double default_theta() const { return benchmark_ == Benchmark::poisson ? 0.4 : 0.2; }
  int default_m_min() const { return benchmark_ == Benchmark::poisson ? 100 : 50; }

  /// Initial partition refined to T^(1): four uniform steps of the
  /// two-triangle square, or sixteen intervals of [0,1].
  MeshPtr initial_mesh() const { return initial_mesh_; }

  std::array<double, 2> draw(const SeedPath& seed) const;
  ProblemSample sample(const SeedPath& seed) const { return sample_at(draw(seed)); }
  ProblemSample sample_at(std::array<double, 2> y) const;

  /// Test hooks.  A point mass makes every draw return the same Y; the data
  /// scale multiplies source, boundary datum and exact solution.
  void set_point_mass(std::optional<std::array<double, 2>> y) { point_mass_ = y; }
  const std::optional<std::array<double, 2>>& point_mass() const { return point_mass_; }
  void set_data_scale(double s) { data_scale_ = s; }
  double data_scale() const { return data_scale_; }

private:
  ProblemFamily(Benchmark b, double beta);

  Benchmark benchmark_;
  double beta_;
  double data_scale_ = 1.0;
  std::optional<std::array<double, 2>> point_mass_;
  MeshPtr initial_mesh_;
};

}  // namespace amlmc
