#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "amlmc/fem.hpp"
#include "amlmc/mesh.hpp"
#include "amlmc/problems.hpp"

namespace testing {

using amlmc::MeshPtr;
using amlmc::Point;

inline MeshPtr interval_mesh(double a, double b, int n) {
  return amlmc::Mesh::from_partition(amlmc::InitialPartition::interval(a, b, n));
}

inline MeshPtr square_mesh(int steps) {
  return amlmc::refine_uniform(amlmc::Mesh::from_partition(amlmc::InitialPartition::square_two_triangles()), steps);
}

/// Hand-built pathwise problem.
inline amlmc::ProblemSample custom_sample(int dim, amlmc::ScalarField alpha, amlmc::ScalarField f,
                                          amlmc::ScalarField g, bool unit_alpha) {
  amlmc::ProblemSample s;
  s.dimension = dim;
  s.benchmark = dim == 2 ? amlmc::Benchmark::poisson : amlmc::Benchmark::obstacle;
  s.unit_coefficient = unit_alpha;
  s.coefficient = std::move(alpha);
  s.source = std::move(f);
  s.boundary = std::move(g);
  return s;
}

inline amlmc::ScalarField constant(double c) {
  return [c](const Point&) { return c; };
}

/// Order-independent serialization of a forest: per root a depth-first walk
/// emitting a leaf flag and the exact vertex coordinates of every node.
inline std::vector<double> canonical_forest(const amlmc::Mesh& m) {
  std::vector<double> out;
  const int nv = m.vertices_per_element();
  std::function<void(std::int32_t)> walk = [&](std::int32_t n) {
    const auto& node = m.forest()[n];
    out.push_back(node.is_leaf() ? 1.0 : 0.0);
    for (int k = 0; k < nv; ++k) {
      out.push_back(m.vertex(node.v[k])[0]);
      out.push_back(m.vertex(node.v[k])[1]);
    }
    if (!node.is_leaf()) {
      walk(node.first_child);
      walk(node.first_child + 1);
    }
  };
  for (std::size_t r = 0; r < m.num_roots(); ++r) walk(static_cast<std::int32_t>(r));
  return out;
}

/// Value of a P1 function at a point, by brute-force element search.
inline double evaluate(const amlmc::FeFunction& f, const Point& x) {
  const amlmc::Mesh& m = *f.mesh;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto v = m.element(e);
    if (m.dimension() == 1) {
      const double a = m.vertex(v[0])[0], b = m.vertex(v[1])[0];
      if (x[0] >= std::min(a, b) - 1e-14 && x[0] <= std::max(a, b) + 1e-14) {
        const double t = (x[0] - a) / (b - a);
        return (1 - t) * f.values[v[0]] + t * f.values[v[1]];
      }
    } else {
      const Point& p0 = m.vertex(v[0]);
      const Point& p1 = m.vertex(v[1]);
      const Point& p2 = m.vertex(v[2]);
      const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
      const double l1 = ((x[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (x[1] - p0[1])) / det;
      const double l2 = ((p1[0] - p0[0]) * (x[1] - p0[1]) - (x[0] - p0[0]) * (p1[1] - p0[1])) / det;
      const double l0 = 1 - l1 - l2;
      if (l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12) {
        return l0 * f.values[v[0]] + l1 * f.values[v[1]] + l2 * f.values[v[2]];
      }
    }
  }
  return std::nan("");
}

}  // namespace testing
