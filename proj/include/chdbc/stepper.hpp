#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "chdbc/assembly.hpp"
#include "chdbc/diagnostics.hpp"
#include "chdbc/params.hpp"
#include "chdbc/potential.hpp"
#include "chdbc/schur.hpp"

namespace chdbc {

struct NewtonOptions {
  double tol_abs = 1e-10;
  double tol_rel = 1e-10;
  int max_iter = 50;
  int max_halvings = 20;
  /// Tolerance for the agreement between the Newton potentials and the ones
  /// recovered through the boundary elimination, relative to 1 + |mu|_inf.
  double equivalence_tol = 1e-9;
  /// On step failure, retry the step as two half steps (recursively, up to
  /// four levels). Off by default so that runs are reproducible.
  bool retry_halving = false;
};

struct StepResult {
  Vector U;
  Vector mu_bulk;
  Vector mu_surf;
  int newton_iters = 0;
  double residual_norm = 0.0;
  std::vector<double> residual_history;  // eliminated-scheme residual per iterate
  /// Max-norm distance between Newton potentials and eliminated potentials.
  double equivalence_gap = 0.0;
};

/// Residuals of the two mass balances the scheme must satisfy individually
/// (the summed bulk balance and the boundary exchange balance), in nodal
/// units (load vectors divided by the lumped masses).
struct BalanceResiduals {
  double summed = 0.0;
  double exchange = 0.0;
};

/// Advances the phase field by the convex-concave split scheme with
/// reaction-rate dependent dynamic boundary conditions.
///
/// Each step solves the coupled system for (U, mu, theta) by damped Newton:
///   D (U - U_prev) + tau K mu + tau/beta ext(K_G theta) = 0,
///   w_inf [M_G (U - U_prev)|_G + tau K_G theta]
///       + tau w_zero beta M_G (beta theta - mu|_G) = 0,
///   M mu + ext(M_G theta) = eps L U + delta kappa ext(L_G U|_G)
///       + eps^-1 M (F1'(U) + F2'(U_prev)) + delta^-1 ext(M_G (G1' + G2')),
/// where D = M + beta^-1 ext(M_G), K = m_bulk L, K_G = m_surf L_G. The
/// potentials of the accepted step are recovered through the boundary
/// elimination and must agree with the Newton potentials.
class Stepper {
 public:
  Stepper(FemMatrices fem, ModelParams params, SplitPotential bulk_potential,
          SplitPotential surf_potential, NewtonOptions options = {});
  ~Stepper();
  Stepper(Stepper&&) noexcept;
  Stepper& operator=(Stepper&&) noexcept;

  const FemMatrices& fem() const { return fem_; }
  const ModelParams& params() const { return params_; }
  const SchurSystem& schur() const { return schur_; }
  const SplitPotential& bulk_potential() const { return bulk_; }
  const SplitPotential& surf_potential() const { return surf_; }
  const NewtonOptions& options() const { return options_; }

  /// One step of size params().tau. Throws SolverError on non-convergence.
  StepResult step(const Vector& U_prev);
  StepResult step(const Vector& U_prev, double tau);

  /// Potentials through the boundary elimination.
  Potentials potentials(const Vector& U, const Vector& U_prev) const;

  /// Lumped dual norm of the eliminated scheme residual
  ///   D (U - U_prev) + tau K mu(U) + tau/beta ext(K_G theta(U)).
  double scheme_residual(const Vector& U, const Vector& U_prev, const Potentials& mu,
                         double tau) const;

  BalanceResiduals balance_residuals(const Vector& U, const Vector& U_prev, const Potentials& mu,
                                     double tau) const;

 private:
  struct LinearSolver;
  StepResult step_impl(const Vector& U_prev, double tau);
  LinearSolver& linear_solver(double tau);

  FemMatrices fem_;
  ModelParams params_;
  SplitPotential bulk_;
  SplitPotential surf_;
  NewtonOptions options_;
  SchurSystem schur_;
  Vector scheme_mass_;  // diag(D)
  std::map<double, std::unique_ptr<LinearSolver>> solvers_;
};

using StepObserver = std::function<void(const StepRecord&, const Vector& U, const Potentials&)>;

/// Runs n_steps steps from U0. Samples (U, mu, theta) every sample_stride
/// steps starting at t = 0; the initial potentials are recovered with
/// U_prev = U0. Throws StepFailure carrying the failing step index.
Trajectory run(Stepper& stepper, const Vector& U0, std::size_t n_steps, std::size_t sample_stride,
               const StepObserver& observer = {});

class StepFailure : public std::runtime_error {
 public:
  StepFailure(std::size_t step, const std::string& what, Trajectory partial)
      : std::runtime_error(what), step_(step), partial_(std::move(partial)) {}
  std::size_t step() const { return step_; }
  const Trajectory& partial() const { return partial_; }

 private:
  std::size_t step_;
  Trajectory partial_;
};

}  // namespace chdbc
