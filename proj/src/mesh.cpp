#include "amlmc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

namespace amlmc {

namespace {

inline std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return lo << 32 | hi;
}

inline Point midpoint(const Point& a, const Point& b) {
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
}

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

}  // namespace

// ---------------------------------------------------------------------------
// InitialPartition

InitialPartition::InitialPartition(int dimension, std::vector<Point> vertices,
                                   std::vector<std::array<int, 3>> elements)
    : dim_(dimension), vertices_(std::move(vertices)), elements_(std::move(elements)) {
  if (dim_ != 1 && dim_ != 2) throw MeshError("initial partition: dimension must be 1 or 2");
  if (elements_.empty()) throw MeshError("initial partition: no elements");
  const int nv = static_cast<int>(vertices_.size());
  for (const auto& el : elements_) {
    for (int k = 0; k <= dim_; ++k) {
      if (el[k] < 0 || el[k] >= nv) throw MeshError("initial partition: vertex index out of range");
    }
    if (dim_ == 1 && !(vertices_[el[1]][0] > vertices_[el[0]][0])) {
      throw MeshError("initial partition: intervals must be ordered left to right");
    }
    if (dim_ == 2 && !(signed_area(vertices_[el[0]], vertices_[el[1]], vertices_[el[2]]) > 0.0)) {
      throw MeshError("initial partition: triangles must be counter-clockwise");
    }
  }

  boundary_.assign(vertices_.size(), 0);
  if (dim_ == 1) {
    std::vector<int> count(vertices_.size(), 0);
    for (const auto& el : elements_) {
      ++count[el[0]];
      ++count[el[1]];
    }
    for (int v = 0; v < nv; ++v) {
      if (count[v] == 1) {
        boundary_[v] = 1;
        boundary_facets_.push_back({v, v});
      }
    }
  } else {
    std::unordered_map<std::uint64_t, int> count;
    for (const auto& el : elements_) {
      for (int k = 0; k < 3; ++k) ++count[edge_key(el[(k + 1) % 3], el[(k + 2) % 3])];
    }
    for (const auto& [key, c] : count) {
      if (c > 2) throw MeshError("initial partition: edge shared by more than two triangles");
      if (c == 1) {
        const auto a = static_cast<int>(key >> 32);
        const auto b = static_cast<int>(key & 0xFFFFFFFFu);
        boundary_[a] = boundary_[b] = 1;
        boundary_facets_.push_back({a, b});
      }
    }
    std::sort(boundary_facets_.begin(), boundary_facets_.end());
  }
}

std::shared_ptr<const InitialPartition> InitialPartition::interval(double a, double b, int n) {
  if (n < 1 || !(b > a)) throw MeshError("interval partition: need n >= 1 and b > a");
  std::vector<Point> vertices(n + 1);
  for (int i = 0; i <= n; ++i) vertices[i] = {a + (b - a) * i / n, 0.0};
  vertices[n][0] = b;
  std::vector<std::array<int, 3>> elements(n);
  for (int i = 0; i < n; ++i) elements[i] = {i, i + 1, -1};
  return std::make_shared<const InitialPartition>(1, std::move(vertices), std::move(elements));
}

std::shared_ptr<const InitialPartition> InitialPartition::square_two_triangles() {
  std::vector<Point> vertices{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}};
  // Right angles at (1,-1) and (-1,1) are the newest vertices; both triangles
  // bisect the shared diagonal first.
  std::vector<std::array<int, 3>> elements{{1, 2, 0}, {3, 0, 2}};
  return std::make_shared<const InitialPartition>(2, std::move(vertices), std::move(elements));
}

bool InitialPartition::on_boundary(const Point& p) const {
  constexpr double tol = 1e-12;
  for (const auto& f : boundary_facets_) {
    const Point& a = vertices_[f[0]];
    const Point& b = vertices_[f[1]];
    if (dim_ == 1) {
      if (std::abs(p[0] - a[0]) <= tol * (1.0 + std::abs(a[0]))) return true;
      continue;
    }
    const double len = distance(a, b);
    const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    if (std::abs(cross) > tol * len * len) continue;
    const double t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
    if (t >= -tol && t <= 1.0 + tol) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Mesh construction helpers

class MeshBuilder {
public:
  static MeshPtr from_partition(std::shared_ptr<const InitialPartition> partition);
  static MeshPtr refine(const Mesh& mesh, const ElementSet& marked);
  static MeshPtr merge(const Mesh& a, const Mesh& b);

private:
  // Mutable state for building a refined copy of a forest.
  struct Work {
    std::vector<ForestNode> nodes;
    std::vector<Point> coords;
    std::vector<std::array<std::int32_t, 2>> parents;
    std::vector<std::int32_t> generation;
    std::unordered_map<std::uint64_t, std::int32_t> midpoints;

    std::int32_t midpoint_of(std::int32_t a, std::int32_t b, std::int32_t gen) {
      const auto key = edge_key(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) {
        generation[it->second] = std::min(generation[it->second], gen);
        return it->second;
      }
      const auto m = static_cast<std::int32_t>(coords.size());
      coords.push_back(midpoint(coords[a], coords[b]));
      parents.push_back({std::min(a, b), std::max(a, b)});
      generation.push_back(gen);
      midpoints.emplace(key, m);
      return m;
    }

    // Bisects a leaf; returns the midpoint vertex.
    std::int32_t bisect(std::int32_t id, int dim) {
      const ForestNode node = nodes[id];
      const auto child = static_cast<std::int32_t>(nodes.size());
      ForestNode c0, c1;
      c0.parent = c1.parent = id;
      c0.depth = c1.depth = node.depth + 1;
      std::int32_t m;
      if (dim == 1) {
        m = midpoint_of(node.v[0], node.v[1], node.depth + 1);
        c0.v = {node.v[0], m, -1};
        c1.v = {m, node.v[1], -1};
      } else {
        const auto [a, b, c] = node.v;
        m = midpoint_of(b, c, node.depth + 1);
        c0.v = {m, a, b};
        c1.v = {m, c, a};
      }
      nodes.push_back(c0);
      nodes.push_back(c1);
      nodes[id].first_child = child;
      return m;
    }
  };

  static MeshPtr finish(std::shared_ptr<const InitialPartition> partition, Work&& w) {
    auto mesh = std::shared_ptr<Mesh>(new Mesh());
    mesh->partition_ = std::move(partition);
    mesh->nodes_ = std::move(w.nodes);
    mesh->coords_ = std::move(w.coords);
    mesh->parents_ = std::move(w.parents);
    mesh->vertex_generation_ = std::move(w.generation);
    mesh->finalize();
    return mesh;
  }

  static Work copy_of(const Mesh& mesh) {
    Work w;
    w.nodes = mesh.nodes_;
    w.coords = mesh.coords_;
    w.parents = mesh.parents_;
    w.generation = mesh.vertex_generation_;
    return w;
  }
};

MeshPtr MeshBuilder::from_partition(std::shared_ptr<const InitialPartition> partition) {
  if (!partition) throw MeshError("mesh: null partition");
  Work w;
  w.coords = partition->vertices();
  w.parents.assign(w.coords.size(), {-1, -1});
  w.generation.assign(w.coords.size(), 0);
  for (const auto& el : partition->elements()) {
    ForestNode n;
    n.v = {el[0], el[1], partition->dimension() == 2 ? el[2] : -1};
    w.nodes.push_back(n);
  }
  return finish(std::move(partition), std::move(w));
}

MeshPtr MeshBuilder::refine(const Mesh& mesh, const ElementSet& marked) {
  if (marked.empty()) throw StalledRefinement("refine_marked: empty marked set");
  for (int e : marked) {
    if (e < 0 || static_cast<std::size_t>(e) >= mesh.num_elements()) {
      throw MeshError("refine_marked: element index out of range");
    }
  }
  Work w = copy_of(mesh);
  const int dim = mesh.dimension();

  if (dim == 1) {
    ElementSet sorted = marked;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (int e : sorted) w.bisect(mesh.leaves_[e], 1);
    return finish(mesh.partition_, std::move(w));
  }

  // Leaf adjacency across edges, kept current while bisecting.
  std::unordered_map<std::uint64_t, std::array<std::int32_t, 2>> edge_leaves;
  edge_leaves.reserve(mesh.num_elements() * 2);
  auto attach = [&](std::int32_t id) {
    const auto& v = w.nodes[id].v;
    for (int k = 0; k < 3; ++k) {
      auto& slot = edge_leaves.try_emplace(edge_key(v[(k + 1) % 3], v[(k + 2) % 3]),
                                           std::array<std::int32_t, 2>{-1, -1})
                       .first->second;
      (slot[0] < 0 ? slot[0] : slot[1]) = id;
    }
  };
  auto detach = [&](std::int32_t id) {
    const auto v = w.nodes[id].v;
    for (int k = 0; k < 3; ++k) {
      auto it = edge_leaves.find(edge_key(v[(k + 1) % 3], v[(k + 2) % 3]));
      auto& slot = it->second;
      if (slot[0] == id) slot[0] = -1;
      if (slot[1] == id) slot[1] = -1;
    }
  };
  auto has_hanging = [&](std::int32_t id) {
    const auto& v = w.nodes[id].v;
    for (int k = 0; k < 3; ++k) {
      if (w.midpoints.count(edge_key(v[(k + 1) % 3], v[(k + 2) % 3]))) return true;
    }
    return false;
  };
  for (std::int32_t id : mesh.leaves_) attach(id);

  std::vector<char> is_marked(w.nodes.size(), 0);
  std::vector<std::int32_t> stack;
  for (int e : marked) {
    is_marked[mesh.leaves_[e]] = 1;
    stack.push_back(mesh.leaves_[e]);
  }
  std::reverse(stack.begin(), stack.end());

  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    if (!w.nodes[id].is_leaf()) {
      for (int k = 0; k < 2; ++k) {
        const std::int32_t c = w.nodes[id].first_child + k;
        if (w.nodes[c].is_leaf() ? has_hanging(c) : true) stack.push_back(c);
      }
      continue;
    }
    const bool flagged = static_cast<std::size_t>(id) < is_marked.size() && is_marked[id];
    if (!flagged && !has_hanging(id)) continue;

    const auto v = w.nodes[id].v;
    std::int32_t neighbor = -1;
    {
      const auto& slot = edge_leaves.at(edge_key(v[1], v[2]));
      neighbor = slot[0] == id ? slot[1] : slot[0];
    }
    detach(id);
    w.bisect(id, 2);
    const std::int32_t child = w.nodes[id].first_child;
    attach(child);
    attach(child + 1);
    // Keep the neighbour registered on the now-split edge so it can be found.
    if (neighbor >= 0) {
      auto& slot = edge_leaves[edge_key(v[1], v[2])];
      slot = {neighbor, -1};
      stack.push_back(neighbor);
    }
    for (int k = 0; k < 2; ++k) {
      if (has_hanging(child + k)) stack.push_back(child + k);
    }
  }
  return finish(mesh.partition_, std::move(w));
}

MeshPtr MeshBuilder::merge(const Mesh& a, const Mesh& b) {
  const auto& partition = a.partition_;
  const int dim = partition->dimension();
  Work w;
  w.coords = partition->vertices();
  w.parents.assign(w.coords.size(), {-1, -1});
  w.generation.assign(w.coords.size(), 0);
  const std::size_t roots = partition->elements().size();
  for (std::size_t r = 0; r < roots; ++r) {
    ForestNode n;
    const auto& el = partition->elements()[r];
    n.v = {el[0], el[1], dim == 2 ? el[2] : -1};
    w.nodes.push_back(n);
  }
  // (new node, node in a or -1, node in b or -1); processed breadth-first so
  // vertices appear in generation order.
  struct Triple {
    std::int32_t node, in_a, in_b;
  };
  std::vector<Triple> level, next;
  for (std::size_t r = 0; r < roots; ++r) {
    const auto id = static_cast<std::int32_t>(r);
    level.push_back({id, id, id});
  }
  while (!level.empty()) {
    next.clear();
    for (const auto& t : level) {
      const bool split_a = t.in_a >= 0 && !a.nodes_[t.in_a].is_leaf();
      const bool split_b = t.in_b >= 0 && !b.nodes_[t.in_b].is_leaf();
      if (!split_a && !split_b) continue;
      w.bisect(t.node, dim);
      const std::int32_t child = w.nodes[t.node].first_child;
      for (int k = 0; k < 2; ++k) {
        next.push_back({child + k, split_a ? a.nodes_[t.in_a].first_child + k : -1,
                        split_b ? b.nodes_[t.in_b].first_child + k : -1});
      }
    }
    std::swap(level, next);
  }
  return finish(partition, std::move(w));
}

// ---------------------------------------------------------------------------
// Mesh

MeshPtr Mesh::from_partition(std::shared_ptr<const InitialPartition> partition) {
  return MeshBuilder::from_partition(std::move(partition));
}

void Mesh::finalize() {
  const int dim = dimension();
  leaves_.clear();
  std::vector<std::int32_t> stack;
  for (std::size_t r = num_roots(); r-- > 0;) stack.push_back(static_cast<std::int32_t>(r));
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    const auto& n = nodes_[id];
    if (n.is_leaf()) {
      leaves_.push_back(id);
    } else {
      stack.push_back(n.first_child + 1);
      stack.push_back(n.first_child);
    }
  }

  const std::size_t ne = leaves_.size();
  diameters_.resize(ne);
  measures_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& v = nodes_[leaves_[e]].v;
    if (dim == 1) {
      measures_[e] = diameters_[e] = coords_[v[1]][0] - coords_[v[0]][0];
    } else {
      const Point &p0 = coords_[v[0]], &p1 = coords_[v[1]], &p2 = coords_[v[2]];
      measures_[e] = signed_area(p0, p1, p2);
      diameters_[e] = std::max({distance(p0, p1), distance(p1, p2), distance(p2, p0)});
    }
  }

  boundary_.assign(coords_.size(), 0);
  edges_.clear();
  element_edges_.assign(ne, {-1, -1, -1});
  edge_boundary_.clear();
  if (dim == 1) {
    std::vector<int> count(coords_.size(), 0);
    edges_.reserve(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& v = nodes_[leaves_[e]].v;
      ++count[v[0]];
      ++count[v[1]];
      edges_.push_back({v[0], v[1]});
      element_edges_[e] = {static_cast<std::int32_t>(e), -1, -1};
    }
    edge_boundary_.assign(ne, 0);
    for (std::size_t i = 0; i < coords_.size(); ++i) boundary_[i] = count[i] == 1;
    return;
  }

  struct Incidence {
    std::uint64_t key;
    std::int32_t element;
    std::int32_t local;
  };
  std::vector<Incidence> inc;
  inc.reserve(3 * ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& v = nodes_[leaves_[e]].v;
    for (int k = 0; k < 3; ++k) {
      inc.push_back({edge_key(v[(k + 1) % 3], v[(k + 2) % 3]), static_cast<std::int32_t>(e), k});
    }
  }
  std::sort(inc.begin(), inc.end(), [](const Incidence& x, const Incidence& y) {
    return x.key != y.key ? x.key < y.key : x.element < y.element;
  });
  for (std::size_t i = 0; i < inc.size();) {
    std::size_t j = i;
    while (j < inc.size() && inc[j].key == inc[i].key) ++j;
    const auto id = static_cast<std::int32_t>(edges_.size());
    const auto a = static_cast<std::int32_t>(inc[i].key >> 32);
    const auto b = static_cast<std::int32_t>(inc[i].key & 0xFFFFFFFFu);
    edges_.push_back({a, b});
    const bool on_boundary = (j - i) == 1;
    edge_boundary_.push_back(on_boundary);
    if (on_boundary) boundary_[a] = boundary_[b] = 1;
    for (std::size_t k = i; k < j; ++k) element_edges_[inc[k].element][inc[k].local] = id;
    i = j;
  }
}

double Mesh::max_diameter() const {
  return diameters_.empty() ? 0.0 : *std::max_element(diameters_.begin(), diameters_.end());
}

std::int32_t Mesh::max_generation() const {
  return vertex_generation_.empty()
             ? 0
             : *std::max_element(vertex_generation_.begin(), vertex_generation_.end());
}

bool Mesh::refines(const Mesh& coarse) const {
  if (partition_ != coarse.partition_) return false;
  std::vector<std::pair<std::int32_t, std::int32_t>> stack;
  for (std::size_t r = 0; r < num_roots(); ++r) {
    stack.emplace_back(static_cast<std::int32_t>(r), static_cast<std::int32_t>(r));
  }
  while (!stack.empty()) {
    const auto [c, f] = stack.back();
    stack.pop_back();
    const auto& cn = coarse.nodes_[c];
    if (cn.is_leaf()) continue;
    const auto& fn = nodes_[f];
    if (fn.is_leaf()) return false;
    stack.emplace_back(cn.first_child, fn.first_child);
    stack.emplace_back(cn.first_child + 1, fn.first_child + 1);
  }
  return true;
}

bool Mesh::same_forest(const Mesh& other) const {
  if (this == &other) return true;
  return num_elements() == other.num_elements() && refines(other) && other.refines(*this);
}

std::vector<std::int32_t> Mesh::vertex_map_from(const Mesh& coarse) const {
  if (!refines(coarse)) throw MeshError("vertex map: mesh does not refine the coarse mesh");
  std::vector<std::int32_t> map(coarse.num_vertices(), -1);
  const int nv = vertices_per_element();
  std::vector<std::pair<std::int32_t, std::int32_t>> stack;
  for (std::size_t r = 0; r < num_roots(); ++r) {
    stack.emplace_back(static_cast<std::int32_t>(r), static_cast<std::int32_t>(r));
  }
  while (!stack.empty()) {
    const auto [c, f] = stack.back();
    stack.pop_back();
    const auto& cn = coarse.nodes_[c];
    const auto& fn = nodes_[f];
    for (int k = 0; k < nv; ++k) map[cn.v[k]] = fn.v[k];
    if (cn.is_leaf()) continue;
    stack.emplace_back(cn.first_child, fn.first_child);
    stack.emplace_back(cn.first_child + 1, fn.first_child + 1);
  }
  return map;
}

bool Mesh::is_conforming() const {
  if (dimension() == 1) {
    std::vector<std::pair<double, double>> spans;
    for (std::size_t e = 0; e < num_elements(); ++e) {
      const auto v = element(e);
      spans.emplace_back(coords_[v[0]][0], coords_[v[1]][0]);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first != spans[i - 1].second) return false;
    }
    for (std::size_t v = 0; v < coords_.size(); ++v) {
      if (boundary_[v] && !partition_->on_boundary(coords_[v])) return false;
    }
    return true;
  }
  std::vector<int> count(edges_.size(), 0);
  for (const auto& ee : element_edges_) {
    for (int k = 0; k < 3; ++k) ++count[ee[k]];
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (count[i] > 2) return false;
    if (count[i] == 1) {
      const Point& a = coords_[edges_[i][0]];
      const Point& b = coords_[edges_[i][1]];
      if (!partition_->on_boundary(a) || !partition_->on_boundary(b) ||
          !partition_->on_boundary(midpoint(a, b))) {
        return false;
      }
    }
  }
  return true;
}

void Mesh::write(std::ostream& os) const {
  os.precision(17);
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    os << "vertex " << i << ' ' << coords_[i][0];
    if (dimension() == 2) os << ' ' << coords_[i][1];
    os << '\n';
  }
  for (std::size_t e = 0; e < num_elements(); ++e) {
    os << "element " << e;
    for (auto v : element(e)) os << ' ' << v;
    os << '\n';
  }
}

// ---------------------------------------------------------------------------

MeshPtr refine_uniform(const MeshPtr& mesh, int steps) {
  if (steps < 0) throw MeshError("refine_uniform: negative step count");
  MeshPtr current = mesh;
  const int sweeps = mesh->dimension() == 2 ? 2 : 1;
  for (int s = 0; s < steps * sweeps; ++s) {
    ElementSet all(current->num_elements());
    for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
    current = refine_marked(current, all);
  }
  return current;
}

MeshPtr refine_marked(const MeshPtr& mesh, const ElementSet& marked) {
  return MeshBuilder::refine(*mesh, marked);
}

MeshPtr union_mesh(const MeshPtr& a, const MeshPtr& b) {
  if (a->partition() != b->partition()) {
    throw MeshError("union_mesh: meshes refine different initial partitions");
  }
  if (a->refines(*b)) return a;
  if (b->refines(*a)) return b;
  return MeshBuilder::merge(*a, *b);
}

}  // namespace amlmc
