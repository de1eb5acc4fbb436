#include "amlmc/fem.hpp"

#include <cmath>

namespace amlmc {

FeFunction FeFunction::zero(MeshPtr mesh) {
  const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
  return {std::move(mesh), Vector::Zero(n)};
}

std::array<Point, 3> barycentric_gradients(const Mesh& mesh, std::size_t e) {
  const auto v = mesh.element(e);
  if (mesh.dimension() == 1) {
    const double h = mesh.vertex(v[1])[0] - mesh.vertex(v[0])[0];
    return {Point{-1.0 / h, 0.0}, Point{1.0 / h, 0.0}, Point{0.0, 0.0}};
  }
  const Point &p0 = mesh.vertex(v[0]), &p1 = mesh.vertex(v[1]), &p2 = mesh.vertex(v[2]);
  const double det = 2.0 * mesh.measure(e);
  return {Point{(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det},
          Point{(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det},
          Point{(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det}};
}

Point map_point(const Mesh& mesh, std::size_t e, const std::array<double, 3>& lambda) {
  const auto v = mesh.element(e);
  Point x{0.0, 0.0};
  for (std::size_t k = 0; k < v.size(); ++k) {
    x[0] += lambda[k] * mesh.vertex(v[k])[0];
    x[1] += lambda[k] * mesh.vertex(v[k])[1];
  }
  return x;
}

namespace {

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

}  // namespace

DiscreteSystem assemble(const ProblemSample& sample, const MeshPtr& mesh) {
  const Mesh& m = *mesh;
  if (sample.dimension != m.dimension()) throw MeshError("assemble: sample and mesh dimension differ");
  const QuadratureRule& rule = element_rule(m.dimension());
  const int nloc = m.vertices_per_element();
  const std::size_t n = m.num_vertices();

  DiscreteSystem sys;
  sys.mesh = mesh;
  sys.b = Vector::Zero(static_cast<Eigen::Index>(n));
  std::vector<Eigen::Triplet<double>> stiff, lap;
  stiff.reserve(m.num_elements() * nloc * nloc);
  if (!sample.unit_coefficient) lap.reserve(stiff.capacity());

  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto v = m.element(e);
    const auto grad = barycentric_gradients(m, e);
    const double scale = m.measure(e) / rule.reference_measure();
    double alpha_integral = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = map_point(m, e, rule.points[q]);
      const double wq = rule.weights[q] * scale;
      if (!sample.unit_coefficient) {
        const double a = sample.coefficient(x);
        if (!(a > 0.0)) throw EllipticityError("assemble: coefficient not positive");
        alpha_integral += wq * a;
      }
      const double f = sample.source(x);
      for (int i = 0; i < nloc; ++i) sys.b[v[i]] += wq * f * rule.points[q][i];
    }
    if (sample.unit_coefficient) alpha_integral = m.measure(e);
    for (int i = 0; i < nloc; ++i) {
      for (int j = 0; j < nloc; ++j) {
        const double g = dot(grad[i], grad[j]);
        stiff.emplace_back(v[i], v[j], alpha_integral * g);
        if (!sample.unit_coefficient) lap.emplace_back(v[i], v[j], m.measure(e) * g);
      }
    }
  }
  const auto nn = static_cast<Eigen::Index>(n);
  sys.A.resize(nn, nn);
  sys.A.setFromTriplets(stiff.begin(), stiff.end());
  if (!sample.unit_coefficient) {
    sys.laplace.resize(nn, nn);
    sys.laplace.setFromTriplets(lap.begin(), lap.end());
  }

  sys.dirichlet.assign(n, 0);
  sys.dirichlet_values = Vector::Zero(nn);
  for (std::size_t i = 0; i < n; ++i) {
    if (m.is_boundary_vertex(i)) {
      sys.dirichlet[i] = 1;
      sys.dirichlet_values[i] = sample.boundary(m.vertex(i));
    }
  }
  if (sample.constrained()) {
    Vector psi(nn);
    for (std::size_t i = 0; i < n; ++i) psi[i] = sample.obstacle(m.vertex(i));
    sys.lower = std::move(psi);
  }
  return sys;
}

FeFunction prolong(const FeFunction& f, const MeshPtr& fine) {
  if (f.mesh == fine || f.mesh->same_forest(*fine)) return {fine, f.values};
  const auto map = fine->vertex_map_from(*f.mesh);  // throws when not nested
  const std::size_t n = fine->num_vertices();
  Vector out(static_cast<Eigen::Index>(n));
  std::vector<char> known(n, 0);
  for (std::size_t i = 0; i < map.size(); ++i) {
    out[map[i]] = f.values[i];
    known[map[i]] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (known[i]) continue;
    const auto p = fine->vertex_parents(i);
    out[i] = 0.5 * (out[p[0]] + out[p[1]]);
  }
  return {fine, std::move(out)};
}

FeFunction interpolate(const ScalarField& g, const MeshPtr& mesh) {
  FeFunction f = FeFunction::zero(mesh);
  for (std::size_t i = 0; i < mesh->num_vertices(); ++i) f.values[i] = g(mesh->vertex(i));
  return f;
}

double seminorm_squared(const Mesh& mesh, const Vector& v) {
  double sum = 0.0;
  const int nloc = mesh.vertices_per_element();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto idx = mesh.element(e);
    const auto grad = barycentric_gradients(mesh, e);
    Point g{0.0, 0.0};
    for (int k = 0; k < nloc; ++k) {
      g[0] += v[idx[k]] * grad[k][0];
      g[1] += v[idx[k]] * grad[k][1];
    }
    sum += mesh.measure(e) * dot(g, g);
  }
  return sum;
}

double norm_h(const FeFunction& f, NormKind kind, const ProblemSample* sample) {
  const Mesh& mesh = *f.mesh;
  if (kind == NormKind::seminorm) return std::sqrt(seminorm_squared(mesh, f.values));
  if (kind == NormKind::energy && !sample) throw std::invalid_argument("norm_h: energy norm needs a sample");
  const QuadratureRule& rule = element_rule(mesh.dimension());
  const int nloc = mesh.vertices_per_element();
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto idx = mesh.element(e);
    const auto grad = barycentric_gradients(mesh, e);
    Point g{0.0, 0.0};
    for (int k = 0; k < nloc; ++k) {
      g[0] += f.values[idx[k]] * grad[k][0];
      g[1] += f.values[idx[k]] * grad[k][1];
    }
    const double gg = dot(g, g);
    const double scale = mesh.measure(e) / rule.reference_measure();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double wq = rule.weights[q] * scale;
      if (kind == NormKind::energy) {
        sum += wq * sample->coefficient(map_point(mesh, e, rule.points[q])) * gg;
      } else {
        double val = 0.0;
        for (int k = 0; k < nloc; ++k) val += f.values[idx[k]] * rule.points[q][k];
        sum += wq * (gg + val * val);
      }
    }
  }
  return std::sqrt(sum);
}

double h1_error(const FeFunction& f, const ScalarField& u, const VectorField& grad_u, NormKind kind,
                const QuadratureRule* rule_in) {
  const Mesh& mesh = *f.mesh;
  const QuadratureRule& rule = rule_in ? *rule_in : element_rule(mesh.dimension());
  const int nloc = mesh.vertices_per_element();
  const bool with_l2 = kind == NormKind::full_h1;
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto idx = mesh.element(e);
    const auto grad = barycentric_gradients(mesh, e);
    Point g{0.0, 0.0};
    for (int k = 0; k < nloc; ++k) {
      g[0] += f.values[idx[k]] * grad[k][0];
      g[1] += f.values[idx[k]] * grad[k][1];
    }
    const double scale = mesh.measure(e) / rule.reference_measure();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = map_point(mesh, e, rule.points[q]);
      const Point gu = grad_u(x);
      const double d0 = g[0] - gu[0], d1 = g[1] - gu[1];
      double term = d0 * d0 + d1 * d1;
      if (with_l2) {
        double val = 0.0;
        for (int k = 0; k < nloc; ++k) val += f.values[idx[k]] * rule.points[q][k];
        const double d = val - u(x);
        term += d * d;
      }
      sum += rule.weights[q] * scale * term;
    }
  }
  return std::sqrt(sum);
}

}  // namespace amlmc
