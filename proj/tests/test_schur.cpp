#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "chdbc/schur.hpp"
#include "test_util.hpp"

using namespace chdbc;
using chdbc::testing::Rng;

namespace {

std::vector<Coupling> coupling_grid() {
  return {Coupling::finite(0.0), Coupling::finite(1e-3), Coupling::finite(0.1), Coupling::finite(1.0),
          Coupling::finite(10.0), Coupling::infinite()};
}

}  // namespace

TEST(CouplingWeights, Limits) {
  ModelParams p;
  p.coupling = Coupling::infinite();
  auto w = CouplingWeights::from(p);
  EXPECT_EQ(w.w_inf, 1.0);
  EXPECT_EQ(w.w_zero, 0.0);
  p.coupling = Coupling::finite(0.0);
  w = CouplingWeights::from(p);
  EXPECT_EQ(w.w_inf, 0.0);
  EXPECT_EQ(w.w_zero, 1.0);
}

TEST(CouplingWeights, SumToOne) {
  Rng rng(21);
  ModelParams p;
  for (int i = 0; i < 1000; ++i) {
    p.m_bulk = rng.uniform(0.1, 3.0);
    p.coupling = Coupling::finite(std::pow(10.0, rng.uniform(-8, 8)));
    const auto w = CouplingWeights::from(p);
    EXPECT_NEAR(w.w_inf + w.w_zero, 1.0, 2.3e-16);
    EXPECT_DOUBLE_EQ(w.L_eff, p.coupling.value() / p.m_bulk);
  }
}

TEST(Coupling, ParseAndPrint) {
  EXPECT_TRUE(Coupling::parse("inf").is_infinite());
  EXPECT_TRUE(Coupling::parse("infinity").is_infinite());
  EXPECT_TRUE(Coupling::parse("0").is_zero());
  EXPECT_EQ(Coupling::parse("0.1").value(), 0.1);
  EXPECT_EQ(Coupling::parse("0.25").to_string(), "0.25");
  for (double v : {1e-4, 0.1, 3.0, 1.6e-3, 1e10}) EXPECT_EQ(Coupling::parse(Coupling::finite(v).to_string()).value(), v);
  EXPECT_EQ(Coupling::infinite().to_string(), "inf");
  EXPECT_THROW(Coupling::parse("-1"), std::invalid_argument);
  EXPECT_THROW(Coupling::parse("abc"), std::invalid_argument);
  EXPECT_THROW(Coupling::infinite().value(), std::logic_error);
}

TEST(ModelParams, Validation) {
  ModelParams p;
  EXPECT_NO_THROW(p.validate());
  p.beta = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.m_surf = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.tau = 1.0;
  p.T = 0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.kappa = 0.0;
  EXPECT_NO_THROW(p.validate());
  const FemMatrices fem = assemble(build_unit_square_mesh(2));
  p.beta = 0.0;
  EXPECT_THROW(SchurSystem(fem, p), std::invalid_argument);
}

TEST(SchurSystem, ZeroCouplingIsDiagonal) {
  const FemMatrices fem = assemble(build_unit_square_mesh(4));
  ModelParams p;
  p.m_bulk = p.m_surf = 1.0;
  p.coupling = Coupling::finite(0.0);
  const SchurSystem sys(fem, p);
  const Eigen::MatrixXd N = Eigen::MatrixXd(sys.N());
  const auto nb = static_cast<Eigen::Index>(fem.n_boundary);
  for (Eigen::Index i = 0; i < nb; ++i) {
    const double mb = fem.mass_bulk[i], mg = fem.mass_boundary[i];
    EXPECT_NEAR(N(i, i), mg + 2 * p.beta * mb + p.beta * p.beta * mb * mb / mg, 1e-15);
    for (Eigen::Index j = 0; j < nb; ++j)
      if (j != i) {
        EXPECT_EQ(N(i, j), 0.0);
      }
  }
}

TEST(SchurSystem, InfiniteCouplingSpdOnFourByFour) {
  const FemMatrices fem = assemble(build_unit_square_mesh(4));
  ModelParams p;
  p.m_bulk = p.m_surf = 1.0;
  p.coupling = Coupling::infinite();
  const SchurSystem sys(fem, p);
  const Eigen::MatrixXd N = Eigen::MatrixXd(sys.N());
  ASSERT_EQ(N.rows(), 16);  // 4n boundary vertices
  // Dense reference: L_GG + Mb Mg^-1 L_G Mg^-1 Mb
  const Eigen::MatrixXd L = Eigen::MatrixXd(fem.stiff_bulk).topLeftCorner(16, 16);
  const Eigen::MatrixXd LG = Eigen::MatrixXd(fem.stiff_boundary);
  const Eigen::VectorXd r = fem.mass_bulk.head(16).cwiseQuotient(fem.mass_boundary);
  const Eigen::MatrixXd ref = L + r.asDiagonal() * LG * r.asDiagonal();
  EXPECT_LT((N - ref).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(N);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_TRUE(sys.cholesky_ok());
}

TEST(SchurSystem, ExactlySymmetric) {
  const FemMatrices fem = assemble(build_unit_square_mesh(8));
  ModelParams p;
  p.coupling = Coupling::finite(0.1);
  const SchurSystem sys(fem, p);
  const Eigen::MatrixXd N = Eigen::MatrixXd(sys.N());
  EXPECT_EQ((N - N.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SchurSystem, SpdAcrossGrid) {
  for (std::size_t n : {1u, 2u, 3u, 4u, 8u}) {
    const FemMatrices fem = assemble(build_unit_square_mesh(n));
    for (const auto& L : coupling_grid()) {
      ModelParams p;
      p.coupling = L;
      const SchurSystem sys(fem, p);
      EXPECT_TRUE(sys.cholesky_ok()) << "n=" << n << " L=" << L.to_string();
      const Eigen::MatrixXd N = Eigen::MatrixXd(sys.N());
      EXPECT_EQ((N - N.transpose()).cwiseAbs().maxCoeff(), 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(N);
      EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0) << "n=" << n << " L=" << L.to_string();
    }
  }
}

TEST(RecoverPotentials, PurePhaseIsStationary) {
  const FemMatrices fem = assemble(build_unit_square_mesh(3));
  for (const auto& L : coupling_grid()) {
    ModelParams p;
    p.coupling = L;
    const SchurSystem sys(fem, p);
    const Vector U = Vector::Ones(static_cast<Eigen::Index>(fem.n_bulk));
    const auto mu = recover_potentials(U, U, sys, fem, p, double_well(), double_well());
    EXPECT_LT(mu.mu_bulk.lpNorm<Eigen::Infinity>(), 1e-14);
    EXPECT_LT(mu.mu_surf.lpNorm<Eigen::Infinity>(), 1e-14);
  }
}

TEST(RecoverPotentials, ZeroCouplingIdentity) {
  Rng rng(22);
  const Mesh m = build_unit_square_mesh(6);
  const FemMatrices fem = assemble(m);
  ModelParams p = chdbc::testing::table_params(Coupling::finite(0.0));
  const SchurSystem sys(fem, p);
  const auto W = penalised_double_well(0.004);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector U = chdbc::testing::smooth_state(m, rng);
    const Vector U_prev = chdbc::testing::smooth_state(m, rng);
    const auto mu = recover_potentials(U, U_prev, sys, fem, p, W, W);
    const Vector gap = p.beta * mu.mu_surf - mu.mu_bulk.head(static_cast<Eigen::Index>(fem.n_boundary));
    EXPECT_LT(gap.lpNorm<Eigen::Infinity>(), 1e-10 * (1.0 + mu.mu_bulk.lpNorm<Eigen::Infinity>()));
  }
}

TEST(RecoverPotentials, SatisfiesBothEquations) {
  Rng rng(23);
  const Mesh m = build_unit_square_mesh(5);
  const FemMatrices fem = assemble(m);
  const auto W = penalised_double_well(0.004);
  for (const auto& L : coupling_grid()) {
    ModelParams p = chdbc::testing::table_params(L);
    const SchurSystem sys(fem, p);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector U = chdbc::testing::smooth_state(m, rng);
      const auto mu = recover_potentials(U, U, sys, fem, p, W, W);
      const double scale = 1.0 + std::max(mu.mu_bulk.lpNorm<Eigen::Infinity>(), mu.mu_surf.lpNorm<Eigen::Infinity>());
      EXPECT_LT(compatibility_residual(mu, sys, fem, p), 1e-9 * scale) << L.to_string();
      EXPECT_LT(potential_equation_residual(mu, U, U, fem, p, W, W), 1e-9 * scale) << L.to_string();
    }
  }
}

TEST(RecoverPotentials, CompatibilityDetectsPerturbation) {
  Rng rng(24);
  const Mesh m = build_unit_square_mesh(4);
  const FemMatrices fem = assemble(m);
  for (const auto& L : coupling_grid()) {
    ModelParams p = chdbc::testing::table_params(L);
    const SchurSystem sys(fem, p);
    const Vector U = chdbc::testing::smooth_state(m, rng);
    auto mu = recover_potentials(U, U, sys, fem, p, double_well(), double_well());
    mu.mu_surf[3] += 1.0;
    EXPECT_GT(compatibility_residual(mu, sys, fem, p), 0.1) << L.to_string();
  }
}

TEST(RecoverPotentials, ContinuousAtZeroCoupling) {
  Rng rng(25);
  const Mesh m = build_unit_square_mesh(6);
  const FemMatrices fem = assemble(m);
  ModelParams p0 = chdbc::testing::table_params(Coupling::finite(0.0));
  ModelParams p1 = chdbc::testing::table_params(Coupling::finite(1e-12));
  const SchurSystem s0(fem, p0), s1(fem, p1);
  const Vector U = chdbc::testing::smooth_state(m, rng);
  const auto a = recover_potentials(U, U, s0, fem, p0, double_well(), double_well());
  const auto b = recover_potentials(U, U, s1, fem, p1, double_well(), double_well());
  EXPECT_LT((a.mu_bulk - b.mu_bulk).lpNorm<Eigen::Infinity>(), 1e-8);
  EXPECT_LT((a.mu_surf - b.mu_surf).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(SchurSystem, SolveResidual) {
  Rng rng(26);
  const FemMatrices fem = assemble(build_unit_square_mesh(8));
  ModelParams p;
  p.coupling = Coupling::finite(1.0);
  const SchurSystem sys(fem, p);
  const Vector b = rng.vector(static_cast<Eigen::Index>(fem.n_boundary), -1, 1);
  const Vector x = sys.solve_N(b);
  EXPECT_LE((sys.N() * x - b).norm(), 1e-12 * b.norm());
}
