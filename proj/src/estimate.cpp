#include "amlmc/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace amlmc {

namespace {

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

struct Triangle {
  std::array<Point, 3> p;
  double area;
  std::array<Point, 3> grad;

  explicit Triangle(const std::array<Point, 3>& q) : p(q) {
    const double det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    area = 0.5 * std::abs(det);
    grad = {Point{(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det},
            Point{(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det},
            Point{(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det}};
  }
};

// Residuals and energies of the midpoint hats (per edge) and of the vertex
// hats of the refined mesh (per vertex).
struct Accumulators {
  std::vector<double>& rho;
  std::vector<double>& energy;
  std::vector<double> vertex_rho;
  std::vector<double> vertex_energy;
};

void accumulate_2d(const ProblemSample& sample, const Mesh& mesh, const Vector& u, Accumulators& acc) {
  const QuadratureRule& rule = triangle_rule();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto v = mesh.element(e);
    const auto& edges = mesh.element_edges(e);
    const auto grad_lambda = barycentric_gradients(mesh, e);
    const Point gu{u[v[0]] * grad_lambda[0][0] + u[v[1]] * grad_lambda[1][0] + u[v[2]] * grad_lambda[2][0],
                   u[v[0]] * grad_lambda[0][1] + u[v[1]] * grad_lambda[1][1] + u[v[2]] * grad_lambda[2][1]};
    std::array<Point, 3> P, M;
    for (int k = 0; k < 3; ++k) P[k] = mesh.vertex(v[k]);
    for (int k = 0; k < 3; ++k) {
      const Point& a = P[(k + 1) % 3];
      const Point& b = P[(k + 2) % 3];
      M[k] = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    }
    // Red refinement: three corner triangles and the middle one.  slot[j] is
    // the local midpoint index sitting at sub-vertex j, or -1 for a corner.
    struct Sub {
      std::array<Point, 3> pts;
      std::array<int, 3> slot;
    };
    const std::array<Sub, 4> subs{{
        {{P[0], M[2], M[1]}, {-1, 2, 1}},
        {{P[1], M[0], M[2]}, {-1, 0, 2}},
        {{P[2], M[1], M[0]}, {-1, 1, 0}},
        {{M[0], M[1], M[2]}, {0, 1, 2}},
    }};
    std::array<double, 3> r_loc{0.0, 0.0, 0.0}, d_loc{0.0, 0.0, 0.0};
    for (std::size_t si = 0; si < subs.size(); ++si) {
      const Sub& s = subs[si];
      const Triangle t(s.pts);
      const double scale = t.area / rule.reference_measure();
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& lam = rule.points[q];
        const Point x{lam[0] * t.p[0][0] + lam[1] * t.p[1][0] + lam[2] * t.p[2][0],
                      lam[0] * t.p[0][1] + lam[1] * t.p[1][1] + lam[2] * t.p[2][1]};
        const double w = rule.weights[q] * scale;
        const double f = sample.source(x);
        const double a = sample.unit_coefficient ? 1.0 : sample.coefficient(x);
        for (int j = 0; j < 3; ++j) {
          const int k = s.slot[j];
          const double r = w * (f * lam[j] - a * dot(gu, t.grad[j]));
          const double d = w * a * dot(t.grad[j], t.grad[j]);
          if (k >= 0) {
            r_loc[k] += r;
            d_loc[k] += d;
          } else {
            acc.vertex_rho[v[si]] += r;
            acc.vertex_energy[v[si]] += d;
          }
        }
      }
    }
    for (int k = 0; k < 3; ++k) {
      acc.rho[edges[k]] += r_loc[k];
      acc.energy[edges[k]] += d_loc[k];
    }
  }
}

void accumulate_1d(const ProblemSample& sample, const Mesh& mesh, const Vector& u, Accumulators& acc) {
  const QuadratureRule& rule = interval_rule();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto v = mesh.element(e);
    const double a = mesh.vertex(v[0])[0], b = mesh.vertex(v[1])[0];
    const double h = b - a, m = 0.5 * (a + b);
    const double du = (u[v[1]] - u[v[0]]) / h;
    double r = 0.0, d = 0.0;
    for (int half = 0; half < 2; ++half) {
      const double x0 = half == 0 ? a : m;
      const double slope = (half == 0 ? 2.0 : -2.0) / h;  // phi' on this half
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = rule.points[q][1];
        const double x = x0 + 0.5 * h * t;
        const double phi = half == 0 ? t : 1.0 - t;
        const double w = rule.weights[q] * 0.5 * h;
        const Point p{x, 0.0};
        const double alpha = sample.unit_coefficient ? 1.0 : sample.coefficient(p);
        const double f = sample.source(p);
        r += w * (f * phi - alpha * du * slope);
        d += w * alpha * slope * slope;
        // Vertex hat of the refined mesh on this half: 1 - phi, slope -phi'.
        const auto vert = v[half];
        acc.vertex_rho[vert] += w * (f * (1.0 - phi) + alpha * du * slope);
        acc.vertex_energy[vert] += w * alpha * slope * slope;
      }
    }
    acc.rho[e] = r;
    acc.energy[e] = d;
  }
}

}  // namespace

EstimatorReport estimate_hierarchical(const ProblemSample& sample, const FeFunction& uh) {
  const Mesh& mesh = *uh.mesh;
  const Vector& u = uh.values;
  const std::size_t ne = mesh.num_edges();
  EstimatorReport rep;
  rep.edge_residuals.assign(ne, 0.0);
  rep.edge_energies.assign(ne, 0.0);
  rep.edge_indicators.assign(ne, 0.0);
  Accumulators acc{rep.edge_residuals, rep.edge_energies, std::vector<double>(mesh.num_vertices(), 0.0),
                   std::vector<double>(mesh.num_vertices(), 0.0)};
  if (mesh.dimension() == 1) {
    accumulate_1d(sample, mesh, u, acc);
  } else {
    accumulate_2d(sample, mesh, u, acc);
  }

  for (std::size_t i = 0; i < ne; ++i) {
    if (mesh.is_boundary_edge(i)) continue;
    const double d = rep.edge_energies[i];
    if (!(d > 0.0)) throw std::runtime_error("estimate: non-positive bubble energy");
    double defect = rep.edge_residuals[i] / d;
    if (sample.constrained()) {
      const auto& ed = mesh.edge(i);
      const Point& a = mesh.vertex(ed[0]);
      const Point& b = mesh.vertex(ed[1]);
      const Point m{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
      defect = std::max(defect, sample.obstacle(m) - 0.5 * (u[ed[0]] + u[ed[1]]));
    }
    rep.edge_indicators[i] = std::sqrt(d) * std::abs(defect);
  }

  // Contact vertices: the midpoint hats cannot move a vertex off the obstacle,
  // so a contact set that is too large goes unnoticed.  The vertex hat of the
  // refined mesh is narrower than the coarse one; a positive residual on it
  // means the vertex would lift off after refinement.
  rep.vertex_indicators.assign(mesh.num_vertices(), 0.0);
  std::vector<int> valence;
  if (sample.constrained()) {
    valence.assign(mesh.num_vertices(), 0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      for (auto v : mesh.element(e)) ++valence[v];
    }
    for (std::size_t p = 0; p < mesh.num_vertices(); ++p) {
      if (mesh.is_boundary_vertex(p)) continue;
      const double psi = sample.obstacle(mesh.vertex(p));
      if (u[p] - psi > 1e-12 * (1.0 + std::abs(psi))) continue;
      const double d = acc.vertex_energy[p];
      if (!(d > 0.0)) throw std::runtime_error("estimate: non-positive vertex hat energy");
      rep.vertex_indicators[p] = std::max(acc.vertex_rho[p], 0.0) / std::sqrt(d);
    }
  }

  rep.element_indicators.assign(mesh.num_elements(), 0.0);
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    double s = 0.0;
    if (mesh.dimension() == 1) {
      s = rep.edge_indicators[e] * rep.edge_indicators[e];
    } else {
      for (auto id : mesh.element_edges(e)) s += 0.5 * rep.edge_indicators[id] * rep.edge_indicators[id];
    }
    if (!valence.empty()) {
      for (auto v : mesh.element(e)) {
        const double eta = rep.vertex_indicators[v];
        if (eta > 0.0) s += eta * eta / valence[v];
      }
    }
    rep.element_indicators[e] = std::sqrt(s);
    total += s;
  }
  rep.eta_global = std::sqrt(total);
  return rep;
}

ElementSet mark_doerfler(const EstimatorReport& report, const MarkingConfig& cfg) {
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw std::invalid_argument("mark_doerfler: theta outside (0,1]");
  const auto& eta = report.element_indicators;
  std::vector<int> order(eta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta[a] > eta[b]; });
  double total = 0.0;
  for (int i : order) total += eta[i] * eta[i];
  ElementSet marked;
  if (!(total > 0.0)) return marked;
  const double goal = cfg.theta * total;
  double sum = 0.0;
  for (int i : order) {
    if (sum >= goal || eta[i] == 0.0) break;
    marked.push_back(i);
    sum += eta[i] * eta[i];
  }
  return marked;
}

}  // namespace amlmc
