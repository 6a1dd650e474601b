#include "chdbc/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "chdbc/error.hpp"

namespace chdbc::oracle {

namespace {

struct Weights {
  double inf;   // L/(L+m)
  double zero;  // m/(L+m)
};

Weights weights(const ModelParams& p) {
  if (p.coupling.is_infinite()) return {1.0, 0.0};
  const double L = p.coupling.value();
  return {L / (L + p.m_bulk), p.m_bulk / (L + p.m_bulk)};
}

void guard(const FemMatrices& fem) {
  if (fem.n_bulk > kMaxBulk) throw std::invalid_argument("oracle: mesh too large for dense solves");
}

}  // namespace

Vector lu_solve(DenseMatrix a, Vector b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("oracle::lu_solve: size mismatch");
  double max_pivot = 0.0;
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    for (Eigen::Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (p != k) {
      a.row(k).swap(a.row(p));
      std::swap(b[k], b[p]);
    }
    const double piv = a(k, k);
    max_pivot = std::max(max_pivot, std::abs(piv));
    min_pivot = std::min(min_pivot, std::abs(piv));
    if (piv == 0.0 || min_pivot < 1e-15 * max_pivot) {
      std::ostringstream os;
      os << "oracle: singular system (pivot ratio " << (max_pivot > 0 ? min_pivot / max_pivot : 0.0) << ")";
      throw SolverError(os.str());
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / piv;
      if (f == 0.0) continue;
      for (Eigen::Index j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (Eigen::Index j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

DenseSystem potential_system(const Vector& U, const Vector& U_prev, const FemMatrices& fem,
                             const ModelParams& p, const SplitPotential& F, const SplitPotential& G) {
  guard(fem);
  const auto n = static_cast<Eigen::Index>(fem.n_bulk);
  const auto g = static_cast<Eigen::Index>(fem.n_boundary);
  const Eigen::Index ni = n - g;
  const DenseMatrix L = DenseMatrix(fem.stiff_bulk);
  const DenseMatrix LG = DenseMatrix(fem.stiff_boundary);
  const Weights w = weights(p);

  // Right-hand sides of the potential equation.
  Vector fp(n);
  for (Eigen::Index k = 0; k < n; ++k) fp[k] = F.convex_d1(U[k]) + F.concave_d1(U_prev[k]);
  Vector gp(g);
  for (Eigen::Index k = 0; k < g; ++k) gp[k] = G.convex_d1(U[k]) + G.concave_d1(U_prev[k]);
  const Vector LU = L * U;
  Vector RG(g), RI(ni);
  for (Eigen::Index k = 0; k < g; ++k) RG[k] = p.epsilon * LU[k] + fem.mass_bulk[k] * fp[k] / p.epsilon;
  RG += p.delta * p.kappa * (LG * U.head(g));
  for (Eigen::Index k = 0; k < g; ++k) RG[k] += fem.mass_boundary[k] * gp[k] / p.delta;
  for (Eigen::Index k = 0; k < ni; ++k) RI[k] = p.epsilon * LU[g + k] + fem.mass_bulk[g + k] * fp[g + k] / p.epsilon;

  // Compatibility blocks.
  DenseMatrix A = DenseMatrix::Zero(g, g), B = DenseMatrix::Zero(g, ni), C = DenseMatrix::Zero(g, g);
  for (Eigen::Index i = 0; i < g; ++i) {
    const double mb = fem.mass_bulk[i];
    const double mg = fem.mass_boundary[i];
    for (Eigen::Index j = 0; j < g; ++j) {
      A(i, j) = w.inf * p.m_bulk * L(i, j) / mb;
      C(i, j) = w.inf * p.m_surf * LG(i, j) / mg;
    }
    for (Eigen::Index j = 0; j < ni; ++j) B(i, j) = w.inf * p.m_bulk * L(i, g + j) / mb;
    A(i, i) += w.zero * mg / mb + p.beta * w.zero;
    C(i, i) += p.beta * w.zero * mg / mb + p.beta * p.beta * w.zero;
  }

  DenseSystem sys;
  sys.matrix = DenseMatrix::Zero(n + g, n + g);
  sys.rhs = Vector::Zero(n + g);
  for (Eigen::Index i = 0; i < g; ++i) {
    sys.matrix(i, i) = fem.mass_bulk[i];
    sys.matrix(i, n + i) = fem.mass_boundary[i];
    sys.rhs[i] = RG[i];
  }
  for (Eigen::Index i = 0; i < ni; ++i) {
    sys.matrix(g + i, g + i) = fem.mass_bulk[g + i];
    sys.rhs[g + i] = RI[i];
  }
  sys.matrix.block(n, 0, g, g) = A;
  sys.matrix.block(n, g, g, ni) = B;
  sys.matrix.block(n, n, g, g) = -C;
  return sys;
}

Potentials recover_potentials(const Vector& U, const Vector& U_prev, const FemMatrices& fem,
                              const ModelParams& params, const SplitPotential& F, const SplitPotential& G) {
  DenseSystem sys = potential_system(U, U_prev, fem, params, F, G);
  const Vector x = lu_solve(std::move(sys.matrix), std::move(sys.rhs));
  const auto n = static_cast<Eigen::Index>(fem.n_bulk);
  return {x.head(n), x.tail(static_cast<Eigen::Index>(fem.n_boundary))};
}

StepOutcome step(const Vector& U_prev, const FemMatrices& fem, const ModelParams& p, const SplitPotential& F,
                 const SplitPotential& G) {
  guard(fem);
  const auto n = static_cast<Eigen::Index>(fem.n_bulk);
  const auto g = static_cast<Eigen::Index>(fem.n_boundary);
  const double tau = p.tau;
  const DenseMatrix M = fem.mass_bulk.asDiagonal();
  const DenseMatrix MG = fem.mass_boundary.asDiagonal();
  const DenseMatrix K = p.m_bulk * DenseMatrix(fem.stiff_bulk);
  const DenseMatrix KG = p.m_surf * DenseMatrix(fem.stiff_boundary);
  const DenseMatrix L = DenseMatrix(fem.stiff_bulk);
  const DenseMatrix LG = DenseMatrix(fem.stiff_boundary);
  const Weights w = weights(p);

  auto residual = [&](const Vector& x) {
    const Vector U = x.head(n), mu = x.segment(n, n), th = x.tail(g);
    const Vector dU = U - U_prev;
    const Vector surf = MG * dU.head(g) + tau * KG * th;
    Vector r(2 * n + g);
    Vector r1 = M * dU + tau * K * mu;
    r1.head(g) += surf / p.beta;
    r.head(n) = r1;
    r.segment(n, g) = w.inf * surf + tau * w.zero * p.beta * MG * (p.beta * th - mu.head(g));
    Vector fp(n), gp(g);
    for (Eigen::Index k = 0; k < n; ++k) fp[k] = F.convex_d1(U[k]) + F.concave_d1(U_prev[k]);
    for (Eigen::Index k = 0; k < g; ++k) gp[k] = G.convex_d1(U[k]) + G.concave_d1(U_prev[k]);
    Vector r3 = M * mu - p.epsilon * L * U - M * fp / p.epsilon;
    r3.head(g) += MG * th - p.delta * p.kappa * LG * U.head(g) - MG * gp / p.delta;
    r.tail(n) = r3;
    return r;
  };
  auto jacobian = [&](const Vector& x) {
    DenseMatrix J = DenseMatrix::Zero(2 * n + g, 2 * n + g);
    J.block(0, 0, n, n) = M;
    J.block(0, 0, g, g) += MG / p.beta;
    J.block(0, n, n, n) = tau * K;
    J.block(0, 2 * n, g, g) = tau * KG / p.beta;
    J.block(n, 0, g, g) = w.inf * MG;
    J.block(n, n, g, g) = -tau * w.zero * p.beta * MG;
    J.block(n, 2 * n, g, g) = w.inf * tau * KG + tau * w.zero * p.beta * p.beta * MG;
    const Eigen::Index r3 = n + g;
    J.block(r3, 0, n, n) = -p.epsilon * L;
    J.block(r3, 0, g, g) -= p.delta * p.kappa * LG;
    for (Eigen::Index k = 0; k < n; ++k) J(r3 + k, k) -= fem.mass_bulk[k] * F.convex_d2(x[k]) / p.epsilon;
    for (Eigen::Index k = 0; k < g; ++k) J(r3 + k, k) -= fem.mass_boundary[k] * G.convex_d2(x[k]) / p.delta;
    J.block(r3, n, n, n) = M;
    J.block(r3, 2 * n, g, g) = MG;
    return J;
  };

  const Potentials start = recover_potentials(U_prev, U_prev, fem, p, F, G);
  Vector x(2 * n + g);
  x << U_prev, start.mu_bulk, start.mu_surf;
  Vector r = residual(x);
  for (int it = 1; it <= 60; ++it) {
    const Vector dx = lu_solve(jacobian(x), -r);
    if (dx.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      x += dx;
      return {x.head(n), x.segment(n, n), x.tail(g), it};
    }
    double lambda = 1.0;
    Vector xt = x + dx, rt = residual(xt);
    for (int h = 0; h < 30 && rt.norm() > (1.0 - 1e-4 * lambda) * r.norm(); ++h) {
      lambda *= 0.5;
      xt = x + lambda * dx;
      rt = residual(xt);
    }
    x = xt;
    r = rt;
  }
  throw SolverError("oracle: dense Newton did not converge", r.norm());
}

}  // namespace chdbc::oracle
