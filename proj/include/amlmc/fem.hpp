#pragma once

#include <Eigen/Sparse>
#include <optional>
#include <stdexcept>

#include "amlmc/mesh.hpp"
#include "amlmc/problems.hpp"
#include "amlmc/quadrature.hpp"

namespace amlmc {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Violated ellipticity: the coefficient is not positive somewhere.
class EllipticityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Nodal P1 function bound to a mesh.
struct FeFunction {
  MeshPtr mesh;
  Vector values;

  static FeFunction zero(MeshPtr mesh);
};

/// Linear system of one pathwise problem on one mesh.  A and b are assembled
/// over all vertices; Dirichlet vertices are eliminated by the solvers, which
/// hold them at dirichlet_values.
struct DiscreteSystem {
  MeshPtr mesh;
  SparseMatrix A;
  Vector b;
  std::vector<char> dirichlet;
  Vector dirichlet_values;
  std::optional<Vector> lower;  // nodal obstacle values

  /// Gram matrix of the H seminorm.  Empty when A already is one (alpha == 1).
  SparseMatrix laplace;
  const SparseMatrix& seminorm_matrix() const { return laplace.nonZeros() ? laplace : A; }

  std::size_t size() const { return static_cast<std::size_t>(b.size()); }
  bool constrained() const { return lower.has_value(); }
};

DiscreteSystem assemble(const ProblemSample& sample, const MeshPtr& mesh);

/// Exact embedding of a P1 function into a nested finer space.
FeFunction prolong(const FeFunction& f, const MeshPtr& fine);

/// Nodal interpolant.
FeFunction interpolate(const ScalarField& g, const MeshPtr& mesh);

enum class NormKind { seminorm, full_h1, energy };

/// ||f||_H (seminorm), the full H^1 norm, or the energy norm of `sample`.
double norm_h(const FeFunction& f, NormKind kind = NormKind::seminorm,
              const ProblemSample* sample = nullptr);

/// Squared H seminorm of nodal values on a mesh.
double seminorm_squared(const Mesh& mesh, const Vector& v);

/// H^1 (or seminorm) distance between f and a closed-form function, by
/// elementwise quadrature.
double h1_error(const FeFunction& f, const ScalarField& u, const VectorField& grad_u,
                NormKind kind = NormKind::full_h1, const QuadratureRule* rule = nullptr);

/// Gradients of the barycentric coordinates of element e (constant per
/// element); unused slots are zero.
std::array<Point, 3> barycentric_gradients(const Mesh& mesh, std::size_t e);

/// Physical point for barycentric coordinates lambda in element e.
Point map_point(const Mesh& mesh, std::size_t e, const std::array<double, 3>& lambda);

}  // namespace amlmc
