#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "amlmc/mesh.hpp"
#include "support.hpp"

using namespace amlmc;
using testing::canonical_forest;
using testing::interval_mesh;
using testing::square_mesh;

namespace {

// Geometric identity of every forest node (sorted vertex coordinates).
std::set<std::vector<double>> node_geometry(const Mesh& m) {
  std::set<std::vector<double>> out;
  for (const auto& n : m.forest()) {
    std::vector<std::array<double, 2>> pts;
    for (int k = 0; k < m.vertices_per_element(); ++k) pts.push_back(m.vertex(n.v[k]));
    std::sort(pts.begin(), pts.end());
    std::vector<double> flat;
    for (const auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
    out.insert(flat);
  }
  return out;
}

double total_measure(const Mesh& m) {
  double s = 0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) s += m.measure(e);
  return s;
}

// Marks a pseudo-random subset of leaves.
ElementSet pick(const Mesh& m, unsigned seed, int every) {
  ElementSet s;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    if ((e * 2654435761u + seed) % every == 0) s.push_back(static_cast<int>(e));
  }
  if (s.empty()) s.push_back(0);
  return s;
}

}  // namespace

TEST_CASE("uniform refinement vertex counts") {
  CHECK(square_mesh(4)->num_vertices() == 289);
  for (int k = 0; k <= 6; ++k) {
    const auto n = static_cast<std::size_t>((1 << k) + 1);
    CHECK(square_mesh(k)->num_vertices() == n * n);
    CHECK(square_mesh(k)->num_elements() == 2u << (2 * k));
  }
  const MeshPtr line = interval_mesh(0, 1, 16);
  CHECK(line->num_vertices() == 17);
  CHECK(refine_uniform(line, 1)->num_vertices() == 33);
  const std::size_t table[] = {17, 33, 65, 129, 257, 513};
  for (int l = 0; l < 6; ++l) CHECK(refine_uniform(line, l)->num_vertices() == table[l]);
  const MeshPtr sq = square_mesh(4);
  const std::size_t table2d[] = {289, 1089, 4225, 16641};
  for (int l = 0; l < 4; ++l) CHECK(refine_uniform(sq, l)->num_vertices() == table2d[l]);
}

TEST_CASE("zero uniform steps is the identity") {
  const MeshPtr m = square_mesh(2);
  const MeshPtr r = refine_uniform(m, 0);
  CHECK(canonical_forest(*r) == canonical_forest(*m));
  CHECK(r->num_vertices() == m->num_vertices());
}

TEST_CASE("uniform refinement halves h and nests") {
  const MeshPtr m = square_mesh(1);
  const MeshPtr f = refine_uniform(m, 1);
  CHECK(f->max_diameter() == doctest::Approx(m->max_diameter() / 2));
  CHECK(f->refines(*m));
  CHECK(total_measure(*f) == doctest::Approx(4.0));
  CHECK(f->is_conforming());
}

TEST_CASE("1D marked bisection") {
  const MeshPtr m = interval_mesh(0, 1, 2);
  int left = -1;
  for (std::size_t e = 0; e < m->num_elements(); ++e) {
    const auto v = m->element(e);
    if (std::max(m->vertex(v[0])[0], m->vertex(v[1])[0]) <= 0.5) left = static_cast<int>(e);
  }
  REQUIRE(left >= 0);
  const MeshPtr r = refine_marked(m, {left});
  std::vector<double> xs;
  for (const auto& p : r->coordinates()) xs.push_back(p[0]);
  std::sort(xs.begin(), xs.end());
  CHECK(xs == std::vector<double>{0.0, 0.25, 0.5, 1.0});
}

TEST_CASE("closure on the two-triangle square") {
  const MeshPtr m = square_mesh(0);
  REQUIRE(m->num_elements() == 2);
  for (int e = 0; e < 2; ++e) {
    const MeshPtr r = refine_marked(m, {e});
    CHECK(r->num_elements() == 4);
    CHECK(r->num_vertices() == 5);
    CHECK(r->is_conforming());
  }
}

TEST_CASE("marking everything is at least one sweep") {
  const MeshPtr m = square_mesh(2);
  ElementSet all(m->num_elements());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
  const MeshPtr r = refine_marked(m, all);
  CHECK(r->num_elements() >= 2 * m->num_elements());
  CHECK(r->num_vertices() > m->num_vertices());
}

TEST_CASE("empty marking signals a stall") {
  CHECK_THROWS_AS(refine_marked(square_mesh(1), {}), StalledRefinement);
}

TEST_CASE("random local refinements stay conforming and nested") {
  MeshPtr m = square_mesh(1);
  for (int step = 0; step < 12; ++step) {
    const MeshPtr r = refine_marked(m, pick(*m, step, 5));
    CHECK(r->is_conforming());
    CHECK(r->refines(*m));
    CHECK(r->num_vertices() > m->num_vertices());
    CHECK(total_measure(*r) == doctest::Approx(4.0).epsilon(1e-12));
    for (std::size_t v = 0; v < r->num_vertices(); ++v) {
      const auto p = r->vertex_parents(v);
      if (p[0] >= 0) {
        CHECK(p[0] < static_cast<int>(v));
        CHECK(p[1] < static_cast<int>(v));
      }
    }
    m = r;
  }
  MeshPtr line = interval_mesh(0, 1, 16);
  for (int step = 0; step < 8; ++step) {
    const MeshPtr r = refine_marked(line, pick(*line, step, 3));
    CHECK(r->is_conforming());
    CHECK(r->refines(*line));
    line = r;
  }
}

TEST_CASE("every leaf of a refinement lies in one leaf of the coarse mesh") {
  const MeshPtr c = refine_marked(square_mesh(1), {0, 3});
  const MeshPtr f = refine_marked(c, pick(*c, 1, 2));
  for (std::size_t e = 0; e < f->num_elements(); ++e) {
    const auto v = f->element(e);
    int hits = 0;
    for (std::size_t t = 0; t < c->num_elements(); ++t) {
      const auto w = c->element(t);
      // Inside t iff all three fine vertices are inside t.
      bool inside = true;
      for (int k = 0; k < 3; ++k) {
        const auto& p = f->vertex(v[k]);
        const auto& a = c->vertex(w[0]);
        const auto& b = c->vertex(w[1]);
        const auto& d = c->vertex(w[2]);
        auto cross = [](const Point& o, const Point& x, const Point& y) {
          return (x[0] - o[0]) * (y[1] - o[1]) - (x[1] - o[1]) * (y[0] - o[0]);
        };
        const double s0 = cross(a, b, p), s1 = cross(b, d, p), s2 = cross(d, a, p);
        const bool neg = s0 < -1e-14 || s1 < -1e-14 || s2 < -1e-14;
        const bool pos = s0 > 1e-14 || s1 > 1e-14 || s2 > 1e-14;
        if (neg && pos) inside = false;
      }
      hits += inside;
    }
    CHECK(hits == 1);
  }
}

TEST_CASE("union algebra") {
  const MeshPtr base = square_mesh(2);
  const MeshPtr a = refine_marked(base, pick(*base, 1, 7));
  const MeshPtr b = refine_marked(refine_marked(base, pick(*base, 2, 5)), {0});
  const MeshPtr c = refine_marked(base, pick(*base, 3, 3));

  CHECK(canonical_forest(*union_mesh(a, a)) == canonical_forest(*a));
  const MeshPtr u1 = refine_uniform(base, 1);
  CHECK(canonical_forest(*union_mesh(u1, base)) == canonical_forest(*u1));
  CHECK(canonical_forest(*union_mesh(base, u1)) == canonical_forest(*u1));

  const MeshPtr ab = union_mesh(a, b);
  CHECK(canonical_forest(*ab) == canonical_forest(*union_mesh(b, a)));
  CHECK(canonical_forest(*union_mesh(ab, c)) == canonical_forest(*union_mesh(a, union_mesh(b, c))));
  CHECK(ab->refines(*a));
  CHECK(ab->refines(*b));
  CHECK(ab->is_conforming());

  // Coarsest: the union's nodes are exactly the nodes of a or b, for these
  // conforming inputs.
  auto ga = node_geometry(*a), gb = node_geometry(*b);
  ga.insert(gb.begin(), gb.end());
  CHECK(node_geometry(*ab) == ga);
}

TEST_CASE("union of two disjoint single marks") {
  const MeshPtr base = square_mesh(3);
  // Elements far apart: the first and the one whose centroid is furthest away.
  const auto centroid = [&](std::size_t e) {
    const auto v = base->element(e);
    Point c{0, 0};
    for (int k = 0; k < 3; ++k) {
      c[0] += base->vertex(v[k])[0] / 3;
      c[1] += base->vertex(v[k])[1] / 3;
    }
    return c;
  };
  const Point c0 = centroid(0);
  std::size_t far = 0;
  double best = 0;
  for (std::size_t e = 0; e < base->num_elements(); ++e) {
    const Point c = centroid(e);
    const double d = std::hypot(c[0] - c0[0], c[1] - c0[1]);
    if (d > best) best = d, far = e;
  }
  const MeshPtr a = refine_marked(base, {0});
  const MeshPtr b = refine_marked(base, {static_cast<int>(far)});
  const MeshPtr u = union_mesh(a, b);
  auto expected = node_geometry(*a);
  const auto gb = node_geometry(*b);
  expected.insert(gb.begin(), gb.end());
  CHECK(node_geometry(*u) == expected);
  CHECK(u->num_vertices() == a->num_vertices() + b->num_vertices() - base->num_vertices());
}

TEST_CASE("union rejects meshes over different partitions") {
  CHECK_THROWS_AS(union_mesh(square_mesh(1), square_mesh(1)), MeshError);
}

TEST_CASE("vertex generations") {
  const MeshPtr m = square_mesh(2);
  for (std::size_t v = 0; v < 4; ++v) CHECK(m->vertex_generation(v) == 0);
  CHECK(m->max_generation() == 4);
}

TEST_CASE("mesh dump format") {
  std::ostringstream os;
  interval_mesh(0, 1, 2)->write(os);
  const std::string s = os.str();
  CHECK(s.find("vertex 0 0") != std::string::npos);
  CHECK(s.find("element 0") != std::string::npos);
}
