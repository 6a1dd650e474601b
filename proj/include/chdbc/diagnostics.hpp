#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chdbc/assembly.hpp"
#include "chdbc/params.hpp"
#include "chdbc/potential.hpp"
#include "chdbc/schur.hpp"

namespace chdbc {

struct EnergyBreakdown {
  double e_bulk = 0.0;
  double e_surf = 0.0;
  double e_total = 0.0;
};

struct Masses {
  double bulk = 0.0;      // 1^T M_Omega U
  double surf = 0.0;      // 1^T M_Gamma U|_G
  double weighted = 0.0;  // beta * bulk + surf
};

struct GapNorms {
  double l2 = 0.0;    // lumped L2(Gamma) norm of beta mu_surf - mu_bulk|_G
  double linf = 0.0;
};

/// E_bulk = eps/2 U^T L U + eps^-1 1^T M F(U),
/// E_surf = delta kappa/2 U_G^T L_G U_G + delta^-1 1^T M_G G(U_G).
EnergyBreakdown discrete_energy(const Vector& U, const FemMatrices& fem, const ModelParams& params,
                                const SplitPotential& bulk_potential,
                                const SplitPotential& surf_potential);

Masses masses(const Vector& U, const FemMatrices& fem, double beta);

GapNorms potential_gap(const Vector& mu_bulk, const Vector& mu_surf, const FemMatrices& fem,
                       double beta);

/// Per-step dissipation bound of the scheme:
///   tau m_bulk mu^T L mu + tau m_surf theta^T L_G theta + B_L,
/// with B_L = tau (m_bulk / L) gap^T M_G gap for finite L > 0, else 0.
double step_dissipation(const Potentials& mu, const FemMatrices& fem, const ModelParams& params,
                        double tau);

/// Lumped (nodal quadrature) L2 norms.
double lumped_norm_bulk(const Vector& v, const FemMatrices& fem);
double lumped_norm_surf(const Vector& v, const FemMatrices& fem);

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  EnergyBreakdown energy;
  Masses mass;
  GapNorms gap;
  int newton_iters = 0;
  double residual = 0.0;
  /// E(U^{n-1}) - E(U^n) - dissipation; nonnegative up to roundoff. Zero for
  /// the initial record.
  double energy_slack = 0.0;
};

struct Sample {
  std::size_t step = 0;
  double t = 0.0;
  Vector U;
  Vector mu_bulk;
  Vector mu_surf;
};

struct Trajectory {
  std::vector<StepRecord> series;  // one record per time level, including t = 0
  std::vector<Sample> samples;     // coarse time grid for error norms
  Vector U_final;
  Potentials final_potentials;
  double sample_dt = 0.0;
};

struct TrajectoryErrors {
  double u_bulk = 0.0;   // ||u_a - u_b||_{L2(0,T;L2(Omega))}
  double u_surf = 0.0;   // ||u_a - u_b||_{L2(0,T;L2(Gamma))}
  double mu_bulk = 0.0;
  double mu_surf = 0.0;
};

/// Space norms lumped, time integral by the trapezoidal rule over the
/// common coarse grid. Throws std::invalid_argument if the sample grids
/// differ or are not spaced by coarse_dt.
TrajectoryErrors trajectory_error(const Trajectory& a, const Trajectory& b, const FemMatrices& fem,
                                  double coarse_dt);

/// ||beta mu_surf - mu_bulk|_G||_{L2(0,T;L2(Gamma))} (trapezoid) and the
/// max over samples of the max-norm.
GapNorms trajectory_gap(const Trajectory& traj, const FemMatrices& fem, double beta);

struct EocRow {
  double x = 0.0;
  double error = 0.0;
  std::optional<double> eoc;  // order between this row and the previous one
};

/// EOC_i = log(err_i / err_{i-1}) / log(x_i / x_{i-1}) for i >= 1. The
/// abscissa must be strictly monotone; rows with a nonpositive error get no
/// EOC rather than a fabricated one.
std::vector<EocRow> eoc_table(std::span<const std::pair<double, double>> rows);

void write_series_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_eoc_csv(const std::filesystem::path& path, const std::vector<EocRow>& rows,
                   const std::string& abscissa_label);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace chdbc
