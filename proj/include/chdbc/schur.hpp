#pragma once

#include <memory>

#include "chdbc/assembly.hpp"
#include "chdbc/params.hpp"
#include "chdbc/potential.hpp"

namespace chdbc {

/// Bulk and surface chemical potentials for one phase-field state.
struct Potentials {
  Vector mu_bulk;  // nodal, length n_bulk
  Vector mu_surf;  // nodal, length n_boundary
};

/// Right-hand sides of the potential equation, split into boundary rows and
/// interior rows. Nonlinear parts use F1'(U) + F2'(U_prev).
struct PotentialRhs {
  Vector boundary;  // R_Gamma
  Vector interior;  // R_I
};

PotentialRhs potential_rhs(const Vector& U, const Vector& U_prev, const FemMatrices& fem,
                           const ModelParams& params, const SplitPotential& bulk_potential,
                           const SplitPotential& surf_potential);

/// Boundary elimination of the interior and surface chemical potentials.
///
/// With K = m_bulk L_Omega, K_G = m_surf L_Gamma, boundary/interior lumped
/// masses Mb, Mi and boundary mass Mg, the compatibility condition between
/// the bulk and surface mass balances reads
///   A mu|_G + B mu|_I = C theta,
///   A = w_inf Mb^-1 K_GG + w_zero Mb^-1 Mg + beta w_zero I,
///   B = w_inf Mb^-1 K_GI,
///   C = w_inf Mg^-1 K_G + beta w_zero Mb^-1 Mg + beta^2 w_zero I,
/// and eliminating mu|_I and theta leaves the symmetric positive definite
/// boundary system
///   N = w_inf (K_GG + Mb Mg^-1 K_G Mg^-1 Mb)
///     + w_zero (Mg + 2 beta Mb + beta^2 Mb Mg^-1 Mb).
/// N depends only on the mesh and the parameters, so it is factorized once.
class SchurSystem {
 public:
  SchurSystem(const FemMatrices& fem, const ModelParams& params);
  ~SchurSystem();
  SchurSystem(SchurSystem&&) noexcept;
  SchurSystem& operator=(SchurSystem&&) noexcept;

  const SparseMatrix& N() const { return N_; }
  const SparseMatrix& A() const { return A_; }
  const SparseMatrix& B() const { return B_; }
  const SparseMatrix& C() const { return C_; }
  const CouplingWeights& weights() const { return weights_; }
  /// True when the sparse Cholesky factorization of N succeeded; otherwise
  /// solves fall back to conjugate gradients.
  bool cholesky_ok() const;

  /// Solves N x = rhs. Throws SolverError if the residual exceeds 1e-12
  /// relative.
  Vector solve_N(const Vector& rhs) const;

  /// mu|_I = Mi^-1 R_I, N mu|_G = -Mb B mu|_I + Mb C Mg^-1 R_G,
  /// theta = Mg^-1 (R_G - Mb mu|_G).
  Potentials recover(const PotentialRhs& rhs) const;

 private:
  struct Factorization;
  Vector mass_gg_;
  Vector mass_ii_;
  Vector mass_surf_;
  SparseMatrix A_, B_, C_, N_;
  CouplingWeights weights_;
  std::unique_ptr<Factorization> factor_;
};

Potentials recover_potentials(const Vector& U, const Vector& U_prev, const SchurSystem& sys,
                              const FemMatrices& fem, const ModelParams& params,
                              const SplitPotential& bulk_potential,
                              const SplitPotential& surf_potential);

/// Max-norm mismatch of the compatibility condition
///   w_inf [M^-1 K mu]|_G - w_zero Mb^-1 Mg (beta theta - mu|_G)
///     = w_inf Mg^-1 K_G theta + beta w_zero (beta theta - mu|_G).
double compatibility_residual(const Potentials& mu, const SchurSystem& sys,
                              const FemMatrices& fem, const ModelParams& params);

/// Max-norm residual of the potential equation
///   M mu + ext(Mg theta) = eps L U + delta kappa ext(L_G U|_G)
///     + eps^-1 M F'(U; U_prev) + delta^-1 ext(Mg G'(U; U_prev)).
double potential_equation_residual(const Potentials& mu, const Vector& U, const Vector& U_prev,
                                   const FemMatrices& fem, const ModelParams& params,
                                   const SplitPotential& bulk_potential,
                                   const SplitPotential& surf_potential);

}  // namespace chdbc
