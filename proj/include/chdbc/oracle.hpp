#pragma once

#include <Eigen/Dense>

#include "chdbc/assembly.hpp"
#include "chdbc/params.hpp"
#include "chdbc/potential.hpp"
#include "chdbc/schur.hpp"

namespace chdbc::oracle {

using DenseMatrix = Eigen::MatrixXd;

inline constexpr std::size_t kMaxBulk = 200;

/// Un-eliminated potential system over (mu|_G, mu|_I, theta):
///   [ Mb  0  Mg ] [mu_G]   [R_G]
///   [ 0   Mi 0  ] [mu_I] = [R_I]
///   [ A   B  -C ] [th  ]   [ 0 ]
struct DenseSystem {
  DenseMatrix matrix;
  Vector rhs;
};

DenseSystem potential_system(const Vector& U, const Vector& U_prev, const FemMatrices& fem,
                             const ModelParams& params, const SplitPotential& bulk_potential,
                             const SplitPotential& surf_potential);

/// Gaussian elimination with partial pivoting. Throws SolverError with a
/// pivot-ratio condition estimate if the matrix is numerically singular.
Vector lu_solve(DenseMatrix a, Vector b);

Potentials recover_potentials(const Vector& U, const Vector& U_prev, const FemMatrices& fem,
                              const ModelParams& params, const SplitPotential& bulk_potential,
                              const SplitPotential& surf_potential);

struct StepOutcome {
  Vector U;
  Vector mu_bulk;
  Vector mu_surf;
  int iterations = 0;
};

/// Damped dense Newton on the full coupled unknowns (U, mu, theta).
StepOutcome step(const Vector& U_prev, const FemMatrices& fem, const ModelParams& params,
                 const SplitPotential& bulk_potential, const SplitPotential& surf_potential);

}  // namespace chdbc::oracle
