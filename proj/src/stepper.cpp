#include "chdbc/stepper.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "chdbc/error.hpp"

namespace chdbc {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

constexpr int kMaxRetryDepth = 4;

}  // namespace

struct Stepper::LinearSolver {
  ColMatrix jacobian;                  // working copy, fixed pattern
  std::vector<double> base_values;     // constant part of the Jacobian
  std::vector<Eigen::Index> diag_pos;  // value slots of d(potential eq)_k / dU_k
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
};

Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

Stepper::Stepper(FemMatrices fem, ModelParams params, SplitPotential bulk_potential,
                 SplitPotential surf_potential, NewtonOptions options)
    : fem_(std::move(fem)),
      params_(params),
      bulk_(std::move(bulk_potential)),
      surf_(std::move(surf_potential)),
      options_(options),
      schur_(fem_, params_) {
  scheme_mass_ = fem_.mass_bulk;
  scheme_mass_.head(static_cast<Eigen::Index>(fem_.n_boundary)) += fem_.mass_boundary / params_.beta;
}

Potentials Stepper::potentials(const Vector& U, const Vector& U_prev) const {
  return recover_potentials(U, U_prev, schur_, fem_, params_, bulk_, surf_);
}

double Stepper::scheme_residual(const Vector& U, const Vector& U_prev, const Potentials& mu,
                                double tau) const {
  const auto nb = static_cast<Eigen::Index>(fem_.n_boundary);
  Vector r = scheme_mass_.cwiseProduct(U - U_prev) +
             (tau * params_.m_bulk) * (fem_.stiff_bulk * mu.mu_bulk);
  r.head(nb) += (tau * params_.m_surf / params_.beta) * (fem_.stiff_boundary * mu.mu_surf);
  return std::sqrt(r.cwiseAbs2().dot(scheme_mass_.cwiseInverse()));
}

BalanceResiduals Stepper::balance_residuals(const Vector& U, const Vector& U_prev,
                                            const Potentials& mu, double tau) const {
  const auto nb = static_cast<Eigen::Index>(fem_.n_boundary);
  const auto& w = schur_.weights();
  const double beta = params_.beta;
  const Vector dU = U - U_prev;
  const Vector surf_flux = (tau * params_.m_surf) * (fem_.stiff_boundary * mu.mu_surf);

  Vector summed = fem_.mass_bulk.cwiseProduct(dU) + (tau * params_.m_bulk) * (fem_.stiff_bulk * mu.mu_bulk);
  summed.head(nb) += (fem_.mass_boundary.cwiseProduct(dU.head(nb)) + surf_flux) / beta;

  const Vector gap = beta * mu.mu_surf - mu.mu_bulk.head(nb);
  const Vector exchange = (w.w_inf / beta) * (fem_.mass_boundary.cwiseProduct(dU.head(nb)) + surf_flux) +
                          (tau * w.w_zero) * fem_.mass_boundary.cwiseProduct(gap);

  BalanceResiduals out;
  out.summed = summed.cwiseQuotient(scheme_mass_).lpNorm<Eigen::Infinity>();
  out.exchange = exchange.cwiseQuotient(fem_.mass_boundary).lpNorm<Eigen::Infinity>();
  return out;
}

Stepper::LinearSolver& Stepper::linear_solver(double tau) {
  auto it = solvers_.find(tau);
  if (it != solvers_.end()) return *it->second;

  const int n = static_cast<int>(fem_.n_bulk);
  const int nb = static_cast<int>(fem_.n_boundary);
  const int mu0 = n;           // mu columns
  const int th0 = 2 * n;       // theta columns
  const int r2 = n;            // exchange rows
  const int r3 = n + nb;       // potential rows
  const auto& w = schur_.weights();
  const double beta = params_.beta;
  const double eps = params_.epsilon;

  Triplets t;
  t.reserve(3 * fem_.stiff_bulk.nonZeros() + 8 * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t.emplace_back(k, k, scheme_mass_[k]);
  for (int i = 0; i < fem_.stiff_bulk.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator e(fem_.stiff_bulk, i); e; ++e) {
      const int j = static_cast<int>(e.col());
      t.emplace_back(i, mu0 + j, tau * params_.m_bulk * e.value());
      t.emplace_back(r3 + i, j, -eps * e.value());
    }
  }
  for (int i = 0; i < fem_.stiff_boundary.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator e(fem_.stiff_boundary, i); e; ++e) {
      const int j = static_cast<int>(e.col());
      t.emplace_back(i, th0 + j, tau * params_.m_surf / beta * e.value());
      t.emplace_back(r2 + i, th0 + j, w.w_inf * tau * params_.m_surf * e.value());
      t.emplace_back(r3 + i, j, -params_.delta * params_.kappa * e.value());
    }
  }
  for (int k = 0; k < nb; ++k) {
    const double mg = fem_.mass_boundary[k];
    t.emplace_back(r2 + k, k, w.w_inf * mg);
    t.emplace_back(r2 + k, mu0 + k, -tau * w.w_zero * beta * mg);
    t.emplace_back(r2 + k, th0 + k, tau * w.w_zero * beta * beta * mg);
    t.emplace_back(r3 + k, th0 + k, mg);
  }
  for (int k = 0; k < n; ++k) {
    t.emplace_back(r3 + k, mu0 + k, fem_.mass_bulk[k]);
    t.emplace_back(r3 + k, k, 0.0);  // slot for the nonlinear diagonal
  }

  auto solver = std::make_unique<LinearSolver>();
  const int size = 2 * n + nb;
  solver->jacobian.resize(size, size);
  solver->jacobian.setFromTriplets(t.begin(), t.end());
  solver->jacobian.makeCompressed();
  const double* values = solver->jacobian.valuePtr();
  solver->base_values.assign(values, values + solver->jacobian.nonZeros());
  solver->diag_pos.assign(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < n; ++k) {
    for (ColMatrix::InnerIterator e(solver->jacobian, k); e; ++e) {
      if (e.row() == r3 + k) solver->diag_pos[static_cast<std::size_t>(k)] = &e.valueRef() - values;
    }
  }
  solver->lu.analyzePattern(solver->jacobian);
  auto& ref = *solver;
  solvers_.emplace(tau, std::move(solver));
  return ref;
}

StepResult Stepper::step(const Vector& U_prev) { return step(U_prev, params_.tau); }

StepResult Stepper::step(const Vector& U_prev, double tau) {
  if (static_cast<std::size_t>(U_prev.size()) != fem_.n_bulk)
    throw std::invalid_argument("Stepper::step: U_prev must have length n_bulk");
  if (!U_prev.allFinite()) throw std::invalid_argument("Stepper::step: U_prev has non-finite entries");
  if (!options_.retry_halving) return step_impl(U_prev, tau);

  // Retry policy: split a failed step into two half steps, recursively.
  std::function<StepResult(const Vector&, double, int)> attempt =
      [&](const Vector& start, double dt, int depth) -> StepResult {
    try {
      return step_impl(start, dt);
    } catch (const SolverError&) {
      if (depth >= kMaxRetryDepth) throw;
      StepResult first = attempt(start, 0.5 * dt, depth + 1);
      StepResult second = attempt(first.U, 0.5 * dt, depth + 1);
      second.newton_iters += first.newton_iters;
      return second;
    }
  };
  return attempt(U_prev, tau, 0);
}

StepResult Stepper::step_impl(const Vector& U_prev, double tau) {
  const auto n = static_cast<Eigen::Index>(fem_.n_bulk);
  const auto nb = static_cast<Eigen::Index>(fem_.n_boundary);
  const auto& w = schur_.weights();
  const double beta = params_.beta;
  const double eps = params_.epsilon;
  const double delta = params_.delta;
  LinearSolver& ls = linear_solver(tau);

  const Vector inv_sqrt_D = scheme_mass_.cwiseSqrt().cwiseInverse();
  const Vector inv_sqrt_Mg = fem_.mass_boundary.cwiseSqrt().cwiseInverse();
  const Vector inv_sqrt_M = fem_.mass_bulk.cwiseSqrt().cwiseInverse();
  const Vector f2_prev = U_prev.unaryExpr([&](double s) { return bulk_.concave_d1(s); });
  const Vector g2_prev = U_prev.head(nb).unaryExpr([&](double s) { return surf_.concave_d1(s); });

  // Coupled residual [R1; R2; R3] at x = [U; mu; theta].
  auto residual = [&](const Vector& x) {
    const auto U = x.segment(0, n);
    const auto mu = x.segment(n, n);
    const auto th = x.segment(2 * n, nb);
    const Vector dU = U - U_prev;
    const Vector surf_flux = (tau * params_.m_surf) * (fem_.stiff_boundary * th);
    Vector F(2 * n + nb);

    Vector r1 = scheme_mass_.cwiseProduct(dU) + (tau * params_.m_bulk) * (fem_.stiff_bulk * mu);
    r1.head(nb) += surf_flux / beta;
    F.segment(0, n) = r1;

    F.segment(n, nb) = w.w_inf * (fem_.mass_boundary.cwiseProduct(dU.head(nb)) + surf_flux) +
                       (tau * w.w_zero * beta) *
                           fem_.mass_boundary.cwiseProduct(beta * th - mu.head(nb));

    Vector f1(n);
    for (Eigen::Index k = 0; k < n; ++k) f1[k] = bulk_.convex_d1(U[k]);
    Vector g1(nb);
    for (Eigen::Index k = 0; k < nb; ++k) g1[k] = surf_.convex_d1(U[k]);
    Vector r3 = fem_.mass_bulk.cwiseProduct(mu) - eps * (fem_.stiff_bulk * U) -
                (1.0 / eps) * fem_.mass_bulk.cwiseProduct(f1 + f2_prev);
    r3.head(nb) += fem_.mass_boundary.cwiseProduct(th) -
                   (delta * params_.kappa) * (fem_.stiff_boundary * U.head(nb)) -
                   (1.0 / delta) * fem_.mass_boundary.cwiseProduct(g1 + g2_prev);
    F.segment(n + nb, n) = r3;
    return F;
  };
  auto merit = [&](const Vector& F) {
    const double a = F.segment(0, n).cwiseProduct(inv_sqrt_D).squaredNorm();
    const double b = F.segment(n, nb).cwiseProduct(inv_sqrt_Mg).squaredNorm();
    const double c = (tau * params_.m_bulk) * (tau * params_.m_bulk) *
                     F.segment(n + nb, n).cwiseProduct(inv_sqrt_M).squaredNorm();
    return std::sqrt(a + b + c);
  };

  const double tol = options_.tol_abs + options_.tol_rel * lumped_norm_bulk(U_prev, fem_);

  Potentials pot = potentials(U_prev, U_prev);
  Vector x(2 * n + nb);
  x << U_prev, pot.mu_bulk, pot.mu_surf;
  Vector F = residual(x);
  double phi = merit(F);

  StepResult result;
  result.residual_history.push_back(scheme_residual(U_prev, U_prev, pot, tau));

  for (int it = 1; it <= options_.max_iter; ++it) {
    double* values = ls.jacobian.valuePtr();
    std::copy(ls.base_values.begin(), ls.base_values.end(), values);
    for (Eigen::Index k = 0; k < n; ++k) {
      double d = -(1.0 / eps) * fem_.mass_bulk[k] * bulk_.convex_d2(x[k]);
      if (k < nb) d -= (1.0 / delta) * fem_.mass_boundary[k] * surf_.convex_d2(x[k]);
      values[ls.diag_pos[static_cast<std::size_t>(k)]] += d;
    }
    ls.lu.factorize(ls.jacobian);
    if (ls.lu.info() != Eigen::Success)
      throw SolverError("Newton: Jacobian factorization failed: " + ls.lu.lastErrorMessage(), phi);
    const Vector dx = ls.lu.solve(Vector(-F));
    if (!dx.allFinite()) throw SolverError("Newton: non-finite update", phi);

    double lambda = 1.0;
    bool accepted = false;
    Vector x_trial;
    Vector F_trial;
    double phi_trial = phi;
    for (int h = 0; h <= options_.max_halvings; ++h) {
      x_trial = x + lambda * dx;
      F_trial = residual(x_trial);
      phi_trial = merit(F_trial);
      if (phi_trial <= (1.0 - 1e-4 * lambda) * phi || phi_trial <= 0.1 * tol) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (accepted) {
      x = std::move(x_trial);
      F = std::move(F_trial);
      phi = phi_trial;
    } else if (phi > tol) {
      std::ostringstream os;
      os << "Newton: line search exhausted at iteration " << it << " (merit " << phi << ")";
      throw SolverError(os.str(), phi);
    }

    const Vector U = x.segment(0, n);
    pot = potentials(U, U_prev);
    const double r = scheme_residual(U, U_prev, pot, tau);
    result.residual_history.push_back(r);
    const double mu_scale = 1.0 + std::max(pot.mu_bulk.lpNorm<Eigen::Infinity>(),
                                           pot.mu_surf.lpNorm<Eigen::Infinity>());
    const double gap = std::max((x.segment(n, n) - pot.mu_bulk).lpNorm<Eigen::Infinity>(),
                                (x.segment(2 * n, nb) - pot.mu_surf).lpNorm<Eigen::Infinity>());

    if (r <= tol && phi <= tol && gap <= options_.equivalence_tol * mu_scale) {
      result.U = U;
      result.mu_bulk = std::move(pot.mu_bulk);
      result.mu_surf = std::move(pot.mu_surf);
      result.newton_iters = it;
      result.residual_norm = r;
      result.equivalence_gap = gap;
      return result;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "Newton: stagnated at iteration " << it << " (residual " << r << ", potential mismatch "
         << gap << ")";
      throw SolverError(os.str(), r);
    }
  }
  std::ostringstream os;
  os << "Newton: no convergence after " << options_.max_iter << " iterations (residual "
     << result.residual_history.back() << ", tolerance " << tol << ")";
  throw SolverError(os.str(), result.residual_history.back());
}

Trajectory run(Stepper& stepper, const Vector& U0, std::size_t n_steps, std::size_t sample_stride,
               const StepObserver& observer) {
  if (sample_stride == 0) throw std::invalid_argument("run: sample_stride must be >= 1");
  const ModelParams& params = stepper.params();
  const FemMatrices& fem = stepper.fem();
  const double tau = params.tau;
  if (static_cast<double>(n_steps) * tau > params.T + 0.5 * tau)
    throw std::invalid_argument("run: n_steps * tau exceeds T");

  auto record = [&](std::size_t s, const Vector& U, const Potentials& mu) {
    StepRecord r;
    r.step = s;
    r.t = static_cast<double>(s) * tau;
    r.energy = discrete_energy(U, fem, params, stepper.bulk_potential(), stepper.surf_potential());
    r.mass = masses(U, fem, params.beta);
    r.gap = potential_gap(mu.mu_bulk, mu.mu_surf, fem, params.beta);
    return r;
  };

  Trajectory traj;
  traj.sample_dt = static_cast<double>(sample_stride) * tau;
  Vector U = U0;
  Potentials mu = stepper.potentials(U0, U0);
  traj.series.push_back(record(0, U, mu));
  traj.samples.push_back({0, 0.0, U, mu.mu_bulk, mu.mu_surf});
  if (observer) observer(traj.series.back(), U, mu);

  for (std::size_t s = 1; s <= n_steps; ++s) {
    StepResult res;
    try {
      res = stepper.step(U);
    } catch (const SolverError& e) {
      traj.U_final = U;
      traj.final_potentials = mu;
      throw StepFailure(s, "step " + std::to_string(s) + ": " + e.what(), std::move(traj));
    }
    Potentials next{std::move(res.mu_bulk), std::move(res.mu_surf)};
    StepRecord r = record(s, res.U, next);
    r.newton_iters = res.newton_iters;
    r.residual = res.residual_norm;
    r.energy_slack = traj.series.back().energy.e_total -
                     (r.energy.e_total + step_dissipation(next, fem, params, tau));
    traj.series.push_back(r);
    U = std::move(res.U);
    mu = std::move(next);
    if (s % sample_stride == 0) traj.samples.push_back({s, r.t, U, mu.mu_bulk, mu.mu_surf});
    if (observer) observer(traj.series.back(), U, mu);
  }
  traj.U_final = U;
  traj.final_potentials = mu;
  return traj;
}

}  // namespace chdbc
