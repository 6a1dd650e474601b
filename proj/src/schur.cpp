#include "chdbc/schur.hpp"

#include <sstream>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "chdbc/error.hpp"

namespace chdbc {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

SparseMatrix diagonal(const Vector& d) {
  SparseMatrix m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index k = 0; k < d.size(); ++k) m.insert(k, k) = d[k];
  m.makeCompressed();
  return m;
}

SparseMatrix identity(Eigen::Index n) { return diagonal(Vector::Ones(n)); }

Vector nonlinear_term(const Vector& U, const Vector& U_prev, const SplitPotential& p) {
  Vector out(U.size());
  for (Eigen::Index k = 0; k < U.size(); ++k) out[k] = p.convex_d1(U[k]) + p.concave_d1(U_prev[k]);
  return out;
}

}  // namespace

struct SchurSystem::Factorization {
  Eigen::SimplicialLLT<ColMatrix> llt;
  ColMatrix n_col;
  bool ok = false;
};

SchurSystem::~SchurSystem() = default;
SchurSystem::SchurSystem(SchurSystem&&) noexcept = default;
SchurSystem& SchurSystem::operator=(SchurSystem&&) noexcept = default;

SchurSystem::SchurSystem(const FemMatrices& fem, const ModelParams& params)
    : factor_(std::make_unique<Factorization>()) {
  params.validate();
  const IndexMaps maps(fem.n_bulk, fem.n_boundary);
  const auto nb = static_cast<Eigen::Index>(fem.n_boundary);
  weights_ = CouplingWeights::from(params);
  const double wi = weights_.w_inf;
  const double wz = weights_.w_zero;
  const double beta = params.beta;

  mass_gg_ = fem.mass_bulk.head(nb);
  mass_ii_ = fem.mass_bulk.tail(static_cast<Eigen::Index>(fem.n_interior()));
  mass_surf_ = fem.mass_boundary;

  const SparseMatrix K = params.m_bulk * fem.stiff_bulk;
  const SparseMatrix KG = params.m_surf * fem.stiff_boundary;
  const SparseMatrix K_gg = maps.block(K, Block::GG);
  const SparseMatrix K_gi = maps.block(K, Block::GI);

  const Vector mb_inv = mass_gg_.cwiseInverse();
  const Vector mg_inv = mass_surf_.cwiseInverse();
  const SparseMatrix Mb = diagonal(mass_gg_);
  const SparseMatrix Mg = diagonal(mass_surf_);
  const SparseMatrix Mb_inv = diagonal(mb_inv);
  const SparseMatrix Mg_inv = diagonal(mg_inv);
  const SparseMatrix Mg_over_Mb = diagonal(mass_surf_.cwiseProduct(mb_inv));
  const SparseMatrix I = identity(nb);

  A_ = wi * SparseMatrix(Mb_inv * K_gg) + wz * Mg_over_Mb + (beta * wz) * I;
  B_ = wi * SparseMatrix(Mb_inv * K_gi);
  C_ = wi * SparseMatrix(Mg_inv * KG) + (beta * wz) * Mg_over_Mb + (beta * beta * wz) * I;

  // Mb Mg^-1 K_G Mg^-1 Mb, formed entrywise as K_G(i,j) * (r_i r_j) so that
  // N is bitwise symmetric.
  const Vector ratio = mass_gg_.cwiseProduct(mg_inv);
  SparseMatrix scaled_KG = KG;
  for (Eigen::Index i = 0; i < scaled_KG.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(scaled_KG, i); it; ++it)
      it.valueRef() *= ratio[it.row()] * ratio[it.col()];
  const SparseMatrix stiff_part = K_gg + scaled_KG;
  const SparseMatrix mass_part =
      Mg + (2.0 * beta) * Mb + (beta * beta) * diagonal(ratio.cwiseProduct(mass_gg_));
  N_ = wi * stiff_part + wz * mass_part;
  N_.prune(0.0);
  N_.makeCompressed();

  factor_->n_col = ColMatrix(N_);
  factor_->llt.compute(factor_->n_col);
  factor_->ok = factor_->llt.info() == Eigen::Success;
}

bool SchurSystem::cholesky_ok() const { return factor_->ok; }

Vector SchurSystem::solve_N(const Vector& rhs) const {
  Vector x;
  if (factor_->ok) {
    x = factor_->llt.solve(rhs);
  } else {
    Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-14);
    cg.setMaxIterations(10 * static_cast<int>(rhs.size()) + 100);
    cg.compute(factor_->n_col);
    x = cg.solve(rhs);
  }
  const double scale = rhs.norm();
  const double res = (N_ * x - rhs).norm();
  if (!x.allFinite() || res > 1e-12 * scale + 1e-300) {
    // One step of iterative refinement before giving up.
    if (factor_->ok && x.allFinite()) {
      x += factor_->llt.solve(Vector(rhs - N_ * x));
      const double res2 = (N_ * x - rhs).norm();
      if (res2 <= 1e-12 * scale) return x;
    }
    std::ostringstream os;
    os << "boundary Schur solve failed: relative residual " << res / (scale > 0 ? scale : 1.0);
    throw SolverError(os.str(), res);
  }
  return x;
}

PotentialRhs potential_rhs(const Vector& U, const Vector& U_prev, const FemMatrices& fem,
                           const ModelParams& params, const SplitPotential& bulk_potential,
                           const SplitPotential& surf_potential) {
  const auto nb = static_cast<Eigen::Index>(fem.n_boundary);
  const auto ni = static_cast<Eigen::Index>(fem.n_interior());
  if (static_cast<std::size_t>(U.size()) != fem.n_bulk || U_prev.size() != U.size())
    throw std::invalid_argument("potential_rhs: state vectors must have length n_bulk");

  const Vector bulk = params.epsilon * (fem.stiff_bulk * U) +
                      (1.0 / params.epsilon) *
                          fem.mass_bulk.cwiseProduct(nonlinear_term(U, U_prev, bulk_potential));
  const Vector Ug = U.head(nb);
  const Vector surf = (params.delta * params.kappa) * (fem.stiff_boundary * Ug) +
                      (1.0 / params.delta) *
                          fem.mass_boundary.cwiseProduct(
                              nonlinear_term(Ug, U_prev.head(nb), surf_potential));
  PotentialRhs r;
  r.boundary = bulk.head(nb) + surf;
  r.interior = bulk.tail(ni);
  return r;
}

Potentials SchurSystem::recover(const PotentialRhs& rhs) const {
  const Vector mu_i = rhs.interior.cwiseQuotient(mass_ii_);
  const Vector mg_inv_r = rhs.boundary.cwiseQuotient(mass_surf_);
  const Vector n_rhs = -mass_gg_.cwiseProduct(B_ * mu_i) + mass_gg_.cwiseProduct(C_ * mg_inv_r);
  const Vector mu_g = solve_N(n_rhs);

  Potentials p;
  p.mu_bulk.resize(mu_g.size() + mu_i.size());
  p.mu_bulk << mu_g, mu_i;
  p.mu_surf = (rhs.boundary - mass_gg_.cwiseProduct(mu_g)).cwiseQuotient(mass_surf_);
  return p;
}

Potentials recover_potentials(const Vector& U, const Vector& U_prev, const SchurSystem& sys,
                              const FemMatrices& fem, const ModelParams& params,
                              const SplitPotential& bulk_potential,
                              const SplitPotential& surf_potential) {
  return sys.recover(potential_rhs(U, U_prev, fem, params, bulk_potential, surf_potential));
}

double compatibility_residual(const Potentials& mu, const SchurSystem& sys,
                              const FemMatrices& fem, const ModelParams& params) {
  const auto nb = static_cast<Eigen::Index>(fem.n_boundary);
  const auto& w = sys.weights();
  const double beta = params.beta;
  const Vector mb = fem.mass_bulk.head(nb);
  const Vector& mg = fem.mass_boundary;
  const Vector gap = beta * mu.mu_surf - mu.mu_bulk.head(nb);

  const Vector flux = params.m_bulk * (fem.stiff_bulk * mu.mu_bulk);
  const Vector lhs =
      w.w_inf * flux.head(nb).cwiseQuotient(mb) - w.w_zero * mg.cwiseQuotient(mb).cwiseProduct(gap);
  const Vector rhs = w.w_inf * (params.m_surf * (fem.stiff_boundary * mu.mu_surf)).cwiseQuotient(mg) +
                     (beta * w.w_zero) * gap;
  return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

double potential_equation_residual(const Potentials& mu, const Vector& U, const Vector& U_prev,
                                   const FemMatrices& fem, const ModelParams& params,
                                   const SplitPotential& bulk_potential,
                                   const SplitPotential& surf_potential) {
  const auto nb = static_cast<Eigen::Index>(fem.n_boundary);
  const PotentialRhs r = potential_rhs(U, U_prev, fem, params, bulk_potential, surf_potential);
  Vector lhs = fem.mass_bulk.cwiseProduct(mu.mu_bulk);
  lhs.head(nb) += fem.mass_boundary.cwiseProduct(mu.mu_surf);
  Vector rhs(lhs.size());
  rhs << r.boundary, r.interior;
  return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

}  // namespace chdbc
