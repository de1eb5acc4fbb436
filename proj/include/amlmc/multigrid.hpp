#pragma once

#include <Eigen/Dense>
#include <vector>

#include "amlmc/fem.hpp"

namespace amlmc {

/// Geometric multigrid hierarchy induced by the bisection forest.
///
/// Level 0 holds every vertex; coarser levels keep the vertices up to some
/// generation, chosen so that the vertex count at least halves per level.
/// Prolongation interpolates a vertex from the endpoints of the edge it
/// bisected, recursively, which is exact for the nested P1 spaces of uniform
/// refinement and a hierarchical-basis style subspace otherwise.
class MultigridHierarchy {
public:
  explicit MultigridHierarchy(const Mesh& mesh, std::size_t coarse_limit = 100);

  std::size_t num_levels() const { return prolongations_.size() + 1; }
  std::size_t level_size(std::size_t k) const { return sizes_[k]; }

  /// Galerkin coarse operators for the fine matrix with the rows and columns
  /// of `truncated` vertices removed.
  void setup(const SparseMatrix& fine, const std::vector<char>& truncated);

  /// One symmetric V-cycle for A c = r starting from c = 0.  Entries of r at
  /// truncated vertices are ignored; c vanishes there.
  Vector vcycle(const Vector& r, int smoothing_steps) const;

private:
  void cycle(std::size_t level, const Vector& r, Vector& x, int nu) const;

  std::vector<std::size_t> sizes_;
  std::vector<SparseMatrix> prolongations_;  // level k+1 -> level k
  std::vector<SparseMatrix> operators_;
  std::vector<Vector> diagonals_;
  std::vector<char> truncated_;
  // Coarsest level: dense factorization on the vertices with positive diagonal.
  std::vector<int> coarse_free_;
  Eigen::LDLT<Eigen::MatrixXd> coarse_solver_;
};

}  // namespace amlmc
