#pragma once

#include <cstddef>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "chdbc/mesh.hpp"

namespace chdbc {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Lumped mass and P1 stiffness matrices in the bulk and on the boundary.
/// Mass matrices are diagonal and stored as their diagonals. Boundary
/// matrices use boundary-local numbering 0..n_boundary-1.
struct FemMatrices {
  Vector mass_bulk;             // diag(M_Omega)
  Vector mass_boundary;         // diag(M_Gamma)
  SparseMatrix stiff_bulk;      // L_Omega
  SparseMatrix stiff_boundary;  // L_Gamma
  std::size_t n_bulk = 0;
  std::size_t n_boundary = 0;

  std::size_t n_interior() const { return n_bulk - n_boundary; }
};

/// Assembles the lumped masses (nodal quadrature) and stiffness matrices.
/// Throws std::invalid_argument if the mesh fails validate_mesh.
FemMatrices assemble(const Mesh& mesh);

enum class Block { GG, GI, IG, II, GO, IO, OG, OI };

/// Restriction/extension operators for the boundary-first splitting
/// A = [[A_GG, A_GI], [A_IG, A_II]] (G: boundary, I: interior, O: all).
class IndexMaps {
 public:
  IndexMaps() = default;
  IndexMaps(std::size_t n_bulk, std::size_t n_boundary);
  explicit IndexMaps(const Mesh& mesh);

  std::size_t n_bulk() const { return n_bulk_; }
  std::size_t n_boundary() const { return n_boundary_; }
  std::size_t n_interior() const { return n_bulk_ - n_boundary_; }

  Vector restrict_boundary(const Vector& bulk) const;
  Vector restrict_interior(const Vector& bulk) const;
  Vector extend_zero(const Vector& boundary) const;

  SparseMatrix block(const SparseMatrix& a, Block which) const;

 private:
  std::size_t n_bulk_ = 0;
  std::size_t n_boundary_ = 0;
};

}  // namespace chdbc
