#include <gtest/gtest.h>

#include "chdbc/error.hpp"
#include "chdbc/oracle.hpp"
#include "chdbc/stepper.hpp"
#include "test_util.hpp"

using namespace chdbc;
using chdbc::testing::Rng;

namespace {

std::vector<Coupling> oracle_couplings() {
  return {Coupling::finite(0.0), Coupling::finite(0.1), Coupling::finite(1.0), Coupling::infinite()};
}

double max_diff(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST(OracleLu, SolvesRandomSystems) {
  Rng rng(31);
  for (int n : {1, 3, 7, 20}) {
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1, 1);
    A += n * Eigen::MatrixXd::Identity(n, n);
    const Vector x = rng.vector(n, -1, 1);
    const Vector sol = oracle::lu_solve(A, A * x);
    EXPECT_LT(max_diff(sol, x), 1e-13);
  }
}

TEST(OracleLu, NeedsPivoting) {
  Eigen::MatrixXd A(2, 2);
  A << 0, 1, 1, 0;
  const Vector sol = oracle::lu_solve(A, Vector((Vector(2) << 2, 3).finished()));
  EXPECT_DOUBLE_EQ(sol[0], 3);
  EXPECT_DOUBLE_EQ(sol[1], 2);
}

TEST(OracleLu, SingularThrows) {
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 2, 4;
  EXPECT_THROW(oracle::lu_solve(A, Vector::Ones(2)), SolverError);
}

TEST(Oracle, RejectsLargeMesh) {
  const FemMatrices fem = assemble(build_unit_square_mesh(16));
  const Vector U = Vector::Zero(static_cast<Eigen::Index>(fem.n_bulk));
  EXPECT_THROW(oracle::recover_potentials(U, U, fem, ModelParams{}, double_well(), double_well()),
               std::invalid_argument);
}

TEST(Oracle, PurePhaseGivesZeroPotentials) {
  const FemMatrices fem = assemble(build_unit_square_mesh(2));
  const Vector U = Vector::Ones(static_cast<Eigen::Index>(fem.n_bulk));
  for (const auto& L : oracle_couplings()) {
    ModelParams p;
    p.coupling = L;
    const auto mu = oracle::recover_potentials(U, U, fem, p, double_well(), double_well());
    EXPECT_LT(mu.mu_bulk.lpNorm<Eigen::Infinity>(), 1e-14);
    EXPECT_LT(mu.mu_surf.lpNorm<Eigen::Infinity>(), 1e-14);
    const auto s = oracle::step(U, fem, p, double_well(), double_well());
    EXPECT_LT(max_diff(s.U, U), 1e-14);
  }
}

TEST(Oracle, ZeroCouplingIdentity) {
  Rng rng(32);
  const Mesh m = build_unit_square_mesh(3);
  const FemMatrices fem = assemble(m);
  ModelParams p = chdbc::testing::table_params(Coupling::finite(0.0));
  const Vector U = chdbc::testing::smooth_state(m, rng);
  const auto mu = oracle::recover_potentials(U, U, fem, p, double_well(), double_well());
  const Vector gap = p.beta * mu.mu_surf - mu.mu_bulk.head(static_cast<Eigen::Index>(fem.n_boundary));
  EXPECT_LT(gap.lpNorm<Eigen::Infinity>(), 1e-12 * (1 + mu.mu_bulk.lpNorm<Eigen::Infinity>()));
}

TEST(Oracle, RecoveryAgreesWithElimination) {
  Rng rng(33);
  const auto W = penalised_double_well(0.004);
  for (std::size_t n : {1u, 2u, 3u}) {
    const Mesh m = build_unit_square_mesh(n);
    const FemMatrices fem = assemble(m);
    for (const auto& L : oracle_couplings()) {
      ModelParams p = chdbc::testing::table_params(L);
      p.m_bulk = rng.uniform(0.5, 2.0);
      p.m_surf = rng.uniform(0.2, 2.0);
      const SchurSystem sys(fem, p);
      for (int trial = 0; trial < 20; ++trial) {
        const Vector U = rng.vector(static_cast<Eigen::Index>(fem.n_bulk), -1.2, 1.2);
        const Vector U_prev = rng.vector(static_cast<Eigen::Index>(fem.n_bulk), -1.2, 1.2);
        const auto a = recover_potentials(U, U_prev, sys, fem, p, W, W);
        const auto b = oracle::recover_potentials(U, U_prev, fem, p, W, W);
        const double scale = 1.0 + b.mu_bulk.lpNorm<Eigen::Infinity>();
        EXPECT_LT(max_diff(a.mu_bulk, b.mu_bulk), 1e-10 * scale) << "n=" << n << " L=" << L.to_string();
        EXPECT_LT(max_diff(a.mu_surf, b.mu_surf), 1e-10 * scale) << "n=" << n << " L=" << L.to_string();
      }
    }
  }
}

TEST(Oracle, StepAgreesWithStepper) {
  Rng rng(34);
  const auto W = penalised_double_well(0.004);
  for (std::size_t n : {1u, 2u, 3u}) {
    const Mesh m = build_unit_square_mesh(n);
    const FemMatrices fem = assemble(m);
    for (const auto& L : oracle_couplings()) {
      ModelParams p = chdbc::testing::table_params(L);
      p.tau = 1e-3;
      Stepper stepper(fem, p, W, W);
      for (int trial = 0; trial < 5; ++trial) {
        const Vector U_prev = chdbc::testing::smooth_state(m, rng);
        const auto a = stepper.step(U_prev);
        const auto b = oracle::step(U_prev, fem, p, W, W);
        EXPECT_LT(max_diff(a.U, b.U), 1e-9) << "n=" << n << " L=" << L.to_string();
        EXPECT_LT(max_diff(a.mu_bulk, b.mu_bulk), 1e-9 * (1 + b.mu_bulk.lpNorm<Eigen::Infinity>()));
        EXPECT_LT(max_diff(a.mu_surf, b.mu_surf), 1e-9 * (1 + b.mu_surf.lpNorm<Eigen::Infinity>()));
      }
    }
  }
}

TEST(Oracle, StepConservesWeightedMass) {
  Rng rng(35);
  const Mesh m = build_unit_square_mesh(3);
  const FemMatrices fem = assemble(m);
  for (const auto& L : oracle_couplings()) {
    ModelParams p = chdbc::testing::table_params(L);
    p.tau = 1e-3;
    const Vector U_prev = chdbc::testing::smooth_state(m, rng);
    const auto s = oracle::step(U_prev, fem, p, double_well(), double_well());
    const auto nb = static_cast<Eigen::Index>(fem.n_boundary);
    auto weighted = [&](const Vector& U) {
      return p.beta * fem.mass_bulk.dot(U) + fem.mass_boundary.dot(U.head(nb));
    };
    EXPECT_NEAR(weighted(s.U), weighted(U_prev), 1e-13 * (1 + std::abs(weighted(U_prev))));
  }
}
