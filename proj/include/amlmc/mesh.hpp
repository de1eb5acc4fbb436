#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace amlmc {

using Point = std::array<double, 2>;

class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Refinement was requested with nothing to refine; in an adaptive loop this
/// means the marking step stalled.
class StalledRefinement : public MeshError {
public:
  using MeshError::MeshError;
};

/// The coarse partition every mesh of a family refines.
///
/// 2D elements are stored as (newest vertex, r0, r1): the refinement edge is
/// r0-r1 and the vertex order is counter-clockwise.  1D elements use the
/// first two slots (left, right) and -1 in the third.
class InitialPartition {
public:
  InitialPartition(int dimension, std::vector<Point> vertices,
                   std::vector<std::array<int, 3>> elements);

  /// [a,b] split into n equal intervals.
  static std::shared_ptr<const InitialPartition> interval(double a, double b, int n);

  /// (-1,1)^2 as two right triangles with right angles at (1,-1) and (-1,1)
  /// sharing the diagonal as refinement edge.
  static std::shared_ptr<const InitialPartition> square_two_triangles();

  int dimension() const { return dim_; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& elements() const { return elements_; }
  const std::vector<char>& boundary() const { return boundary_; }

  /// True when p lies on the domain boundary (a boundary facet of the
  /// partition).
  bool on_boundary(const Point& p) const;

private:
  int dim_;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<char> boundary_;
  std::vector<std::array<int, 2>> boundary_facets_;
};

/// One node of the refinement forest.  Children are always allocated as a
/// consecutive pair starting at first_child.
struct ForestNode {
  std::int32_t first_child = -1;
  std::int32_t parent = -1;
  std::array<std::int32_t, 3> v{-1, -1, -1};
  std::int32_t depth = 0;

  bool is_leaf() const { return first_child < 0; }
};

/// Set of leaf elements of one mesh, by element index.
using ElementSet = std::vector<int>;

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

/// Conforming simplicial mesh stored as a bisection forest over an
/// InitialPartition.  Immutable once built.
class Mesh {
public:
  static MeshPtr from_partition(std::shared_ptr<const InitialPartition> partition);

  int dimension() const { return partition_->dimension(); }
  const std::shared_ptr<const InitialPartition>& partition() const { return partition_; }

  std::size_t num_vertices() const { return coords_.size(); }
  std::size_t num_elements() const { return leaves_.size(); }
  int vertices_per_element() const { return dimension() + 1; }

  const std::vector<Point>& coordinates() const { return coords_; }
  const Point& vertex(std::size_t i) const { return coords_[i]; }

  /// Vertex indices of element e (2 in 1D, 3 in 2D).
  std::span<const std::int32_t> element(std::size_t e) const {
    return {nodes_[leaves_[e]].v.data(), static_cast<std::size_t>(vertices_per_element())};
  }
  double diameter(std::size_t e) const { return diameters_[e]; }
  /// Length (1D) or area (2D).
  double measure(std::size_t e) const { return measures_[e]; }
  double max_diameter() const;

  bool is_boundary_vertex(std::size_t v) const { return boundary_[v] != 0; }

  /// Endpoints of the edge this vertex bisected; {-1,-1} for partition
  /// vertices.  Parents always carry smaller indices than the child.
  std::array<std::int32_t, 2> vertex_parents(std::size_t v) const { return parents_[v]; }
  /// Generation at which a vertex appears (0 for partition vertices).
  std::int32_t vertex_generation(std::size_t v) const { return vertex_generation_[v]; }
  std::int32_t max_generation() const;

  const std::vector<ForestNode>& forest() const { return nodes_; }
  std::size_t num_roots() const { return partition_->elements().size(); }
  std::int32_t element_node(std::size_t e) const { return leaves_[e]; }

  /// Facets: intervals' midpoints are the elements themselves in 1D; in 2D
  /// the unique edges, sorted by vertex pair.
  std::size_t num_edges() const { return edges_.size(); }
  const std::array<std::int32_t, 2>& edge(std::size_t i) const { return edges_[i]; }
  /// Local edge k of a 2D element is the edge opposite local vertex k.
  const std::array<std::int32_t, 3>& element_edges(std::size_t e) const { return element_edges_[e]; }
  bool is_boundary_edge(std::size_t i) const { return edge_boundary_[i] != 0; }

  /// True if this mesh is a refinement of (or equal to) `coarse`.
  bool refines(const Mesh& coarse) const;
  bool same_forest(const Mesh& other) const;

  /// Map from coarse vertex index to this mesh's vertex index; requires
  /// refines(coarse).
  std::vector<std::int32_t> vertex_map_from(const Mesh& coarse) const;

  /// Verifies the edge-sharing invariant: every facet is shared by exactly
  /// two elements or lies on the domain boundary.
  bool is_conforming() const;

  /// Plain-text dump: "vertex i x y" lines then "element e v0 v1 [v2]".
  void write(std::ostream& os) const;

private:
  friend class MeshBuilder;
  Mesh() = default;
  void finalize();

  std::shared_ptr<const InitialPartition> partition_;
  std::vector<ForestNode> nodes_;
  std::vector<Point> coords_;
  std::vector<std::array<std::int32_t, 2>> parents_;
  std::vector<std::int32_t> vertex_generation_;

  // Derived in finalize().
  std::vector<std::int32_t> leaves_;
  std::vector<double> diameters_;
  std::vector<double> measures_;
  std::vector<char> boundary_;
  std::vector<std::array<std::int32_t, 2>> edges_;
  std::vector<std::array<std::int32_t, 3>> element_edges_;
  std::vector<char> edge_boundary_;
};

/// One uniform step bisects every interval once (1D) or applies two full
/// newest-vertex-bisection sweeps (2D), so h halves per step.
MeshPtr refine_uniform(const MeshPtr& mesh, int steps);

/// Newest-vertex bisection of the marked leaves plus conforming closure.
/// Throws StalledRefinement on an empty set.
MeshPtr refine_marked(const MeshPtr& mesh, const ElementSet& marked);

/// Coarsest common refinement of two meshes over the same partition.
MeshPtr union_mesh(const MeshPtr& a, const MeshPtr& b);

}  // namespace amlmc
