#include "amlmc/multigrid.hpp"

#include <algorithm>
#include <map>

namespace amlmc {

namespace {

void gauss_seidel(const SparseMatrix& A, const Vector& diag, const Vector& r, Vector& x,
                  bool forward) {
  const Eigen::Index n = A.rows();
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index i = forward ? s : n - 1 - s;
    if (diag[i] <= 0.0) continue;
    double sum = r[i];
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) sum -= it.value() * x[it.col()];
    x[i] += sum / diag[i];
  }
}

}  // namespace

MultigridHierarchy::MultigridHierarchy(const Mesh& mesh, std::size_t coarse_limit) {
  const std::size_t n = mesh.num_vertices();
  const int gmax = mesh.max_generation();
  std::vector<std::size_t> count(gmax + 1, 0);
  for (std::size_t v = 0; v < n; ++v) ++count[mesh.vertex_generation(v)];
  for (int g = 1; g <= gmax; ++g) count[g] += count[g - 1];

  // Generation cut-offs from fine to coarse.
  std::vector<int> cuts{gmax};
  while (cuts.back() > 0 && count[cuts.back()] > coarse_limit) {
    int g = cuts.back() - 1;
    while (g > 0 && 2 * count[g] > count[cuts.back()]) --g;
    cuts.push_back(g);
  }

  // Local numbering of each level: vertices of the level in global order.
  std::vector<std::vector<int>> local(cuts.size(), std::vector<int>(n, -1));
  sizes_.resize(cuts.size());
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    int next = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (mesh.vertex_generation(v) <= cuts[k]) local[k][v] = next++;
    }
    sizes_[k] = static_cast<std::size_t>(next);
  }

  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    // Rows over the finer level, expressed in coarser-level columns.
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t v = 0; v < n; ++v) {
      if (local[k][v] < 0) continue;
      auto& row = rows[v];
      if (local[k + 1][v] >= 0) {
        row.emplace_back(local[k + 1][v], 1.0);
      } else {
        const auto p = mesh.vertex_parents(v);
        std::map<int, double> merged;
        for (int side = 0; side < 2; ++side) {
          for (const auto& [c, w] : rows[p[side]]) merged[c] += 0.5 * w;
        }
        row.assign(merged.begin(), merged.end());
      }
      for (const auto& [c, w] : row) triplets.emplace_back(local[k][v], c, w);
    }
    SparseMatrix P(static_cast<Eigen::Index>(sizes_[k]), static_cast<Eigen::Index>(sizes_[k + 1]));
    P.setFromTriplets(triplets.begin(), triplets.end());
    prolongations_.push_back(std::move(P));
  }
}

void MultigridHierarchy::setup(const SparseMatrix& fine, const std::vector<char>& truncated) {
  truncated_ = truncated;
  operators_.clear();
  diagonals_.clear();

  SparseMatrix A = fine;
  for (Eigen::Index i = 0; i < A.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      if (truncated[i] || truncated[it.col()]) it.valueRef() = 0.0;
    }
  }
  A.prune(0.0);
  operators_.push_back(std::move(A));
  for (const auto& P : prolongations_) {
    const SparseMatrix AP = operators_.back() * P;
    SparseMatrix coarse = SparseMatrix(P.transpose()) * AP;
    operators_.push_back(std::move(coarse));
  }
  for (const auto& op : operators_) diagonals_.push_back(op.diagonal());

  const SparseMatrix& Ac = operators_.back();
  const Vector& dc = diagonals_.back();
  coarse_free_.clear();
  std::vector<int> position(Ac.rows(), -1);
  for (Eigen::Index i = 0; i < Ac.rows(); ++i) {
    if (dc[i] > 0.0) {
      position[i] = static_cast<int>(coarse_free_.size());
      coarse_free_.push_back(static_cast<int>(i));
    }
  }
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(coarse_free_.size(), coarse_free_.size());
  for (int i : coarse_free_) {
    for (SparseMatrix::InnerIterator it(Ac, i); it; ++it) {
      if (position[it.col()] >= 0) dense(position[i], position[it.col()]) = it.value();
    }
  }
  coarse_solver_.compute(dense);
}

Vector MultigridHierarchy::vcycle(const Vector& r, int smoothing_steps) const {
  Vector rr = r;
  for (Eigen::Index i = 0; i < rr.size(); ++i) {
    if (truncated_[i]) rr[i] = 0.0;
  }
  Vector x = Vector::Zero(r.size());
  cycle(0, rr, x, smoothing_steps);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (truncated_[i]) x[i] = 0.0;
  }
  return x;
}

void MultigridHierarchy::cycle(std::size_t level, const Vector& r, Vector& x, int nu) const {
  const SparseMatrix& A = operators_[level];
  if (level + 1 == operators_.size()) {
    Eigen::VectorXd rhs(coarse_free_.size());
    for (std::size_t j = 0; j < coarse_free_.size(); ++j) rhs[j] = r[coarse_free_[j]];
    const Eigen::VectorXd sol = coarse_solver_.solve(rhs);
    for (std::size_t j = 0; j < coarse_free_.size(); ++j) x[coarse_free_[j]] = sol[j];
    return;
  }
  const Vector& diag = diagonals_[level];
  for (int s = 0; s < nu; ++s) gauss_seidel(A, diag, r, x, true);
  const Vector residual = r - A * x;
  const SparseMatrix& P = prolongations_[level];
  const Vector rc = P.transpose() * residual;
  Vector xc = Vector::Zero(rc.size());
  cycle(level + 1, rc, xc, nu);
  x += P * xc;
  for (int s = 0; s < nu; ++s) gauss_seidel(A, diag, r, x, false);
}

}  // namespace amlmc
