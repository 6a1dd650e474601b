#include "chdbc/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace chdbc {

EnergyBreakdown discrete_energy(const Vector& U, const FemMatrices& fem, const ModelParams& params,
                                const SplitPotential& bulk_potential,
                                const SplitPotential& surf_potential) {
  const auto nb = static_cast<Eigen::Index>(fem.n_boundary);
  double f_sum = 0.0;
  for (Eigen::Index k = 0; k < U.size(); ++k) f_sum += fem.mass_bulk[k] * bulk_potential.value(U[k]);
  const Vector Ug = U.head(nb);
  double g_sum = 0.0;
  for (Eigen::Index k = 0; k < nb; ++k) g_sum += fem.mass_boundary[k] * surf_potential.value(Ug[k]);

  EnergyBreakdown e;
  e.e_bulk = 0.5 * params.epsilon * U.dot(fem.stiff_bulk * U) + f_sum / params.epsilon;
  e.e_surf = 0.5 * params.delta * params.kappa * Ug.dot(fem.stiff_boundary * Ug) + g_sum / params.delta;
  e.e_total = e.e_bulk + e.e_surf;
  return e;
}

Masses masses(const Vector& U, const FemMatrices& fem, double beta) {
  Masses m;
  m.bulk = fem.mass_bulk.dot(U);
  m.surf = fem.mass_boundary.dot(U.head(static_cast<Eigen::Index>(fem.n_boundary)));
  m.weighted = beta * m.bulk + m.surf;
  return m;
}

GapNorms potential_gap(const Vector& mu_bulk, const Vector& mu_surf, const FemMatrices& fem,
                       double beta) {
  const Vector gap = beta * mu_surf - mu_bulk.head(static_cast<Eigen::Index>(fem.n_boundary));
  GapNorms g;
  g.l2 = std::sqrt(gap.cwiseAbs2().dot(fem.mass_boundary));
  g.linf = gap.size() ? gap.lpNorm<Eigen::Infinity>() : 0.0;
  return g;
}

double step_dissipation(const Potentials& mu, const FemMatrices& fem, const ModelParams& params,
                        double tau) {
  double d = tau * params.m_bulk * mu.mu_bulk.dot(fem.stiff_bulk * mu.mu_bulk) +
             tau * params.m_surf * mu.mu_surf.dot(fem.stiff_boundary * mu.mu_surf);
  const auto& L = params.coupling;
  if (!L.is_infinite() && !L.is_zero()) {
    const double g = potential_gap(mu.mu_bulk, mu.mu_surf, fem, params.beta).l2;
    d += tau * (params.m_bulk / L.value()) * g * g;
  }
  return d;
}

double lumped_norm_bulk(const Vector& v, const FemMatrices& fem) {
  return std::sqrt(v.cwiseAbs2().dot(fem.mass_bulk));
}

double lumped_norm_surf(const Vector& v, const FemMatrices& fem) {
  return std::sqrt(v.cwiseAbs2().dot(fem.mass_boundary));
}

namespace {

void check_grid(const Trajectory& traj, double coarse_dt) {
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const double expected = static_cast<double>(k) * coarse_dt;
    if (std::abs(traj.samples[k].t - expected) > 1e-9 * std::max(coarse_dt, expected))
      throw std::invalid_argument("trajectory samples are not on the coarse grid");
  }
}

// Trapezoidal rule for uniformly spaced squared norms, then square root.
double trapezoid_root(const std::vector<double>& squared, double dt) {
  if (squared.size() < 2) return 0.0;
  double sum = 0.5 * (squared.front() + squared.back());
  for (std::size_t k = 1; k + 1 < squared.size(); ++k) sum += squared[k];
  return std::sqrt(sum * dt);
}

}  // namespace

TrajectoryErrors trajectory_error(const Trajectory& a, const Trajectory& b, const FemMatrices& fem,
                                  double coarse_dt) {
  if (!(coarse_dt > 0.0)) throw std::invalid_argument("trajectory_error: coarse_dt must be positive");
  if (a.samples.size() != b.samples.size())
    throw std::invalid_argument("trajectory_error: sample counts differ");
  check_grid(a, coarse_dt);
  check_grid(b, coarse_dt);

  const auto nb = static_cast<Eigen::Index>(fem.n_boundary);
  std::vector<double> eu, eg, emo, emg;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const Sample& sa = a.samples[k];
    const Sample& sb = b.samples[k];
    const Vector du = sa.U - sb.U;
    const double nu = lumped_norm_bulk(du, fem);
    const double ng = lumped_norm_surf(du.head(nb), fem);
    const double nmo = lumped_norm_bulk(sa.mu_bulk - sb.mu_bulk, fem);
    const double nmg = lumped_norm_surf(sa.mu_surf - sb.mu_surf, fem);
    eu.push_back(nu * nu);
    eg.push_back(ng * ng);
    emo.push_back(nmo * nmo);
    emg.push_back(nmg * nmg);
  }
  return {trapezoid_root(eu, coarse_dt), trapezoid_root(eg, coarse_dt),
          trapezoid_root(emo, coarse_dt), trapezoid_root(emg, coarse_dt)};
}

GapNorms trajectory_gap(const Trajectory& traj, const FemMatrices& fem, double beta) {
  std::vector<double> sq;
  GapNorms out;
  for (const auto& s : traj.samples) {
    const GapNorms g = potential_gap(s.mu_bulk, s.mu_surf, fem, beta);
    sq.push_back(g.l2 * g.l2);
    out.linf = std::max(out.linf, g.linf);
  }
  out.l2 = trapezoid_root(sq, traj.sample_dt);
  return out;
}

std::vector<EocRow> eoc_table(std::span<const std::pair<double, double>> rows) {
  std::vector<EocRow> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EocRow r{rows[i].first, rows[i].second, std::nullopt};
    if (i >= 1) {
      const double x0 = rows[i - 1].first;
      const double x1 = rows[i].first;
      const bool increasing = rows.size() < 2 || rows[1].first > rows[0].first;
      if ((increasing && !(x1 > x0)) || (!increasing && !(x1 < x0)))
        throw std::invalid_argument("eoc_table: abscissa must be strictly monotone");
      if (!(x0 > 0.0) || !(x1 > 0.0))
        throw std::invalid_argument("eoc_table: abscissa must be positive");
      const double e0 = rows[i - 1].second;
      const double e1 = rows[i].second;
      if (e0 > 0.0 && e1 > 0.0 && std::isfinite(e0) && std::isfinite(e1))
        r.eoc = std::log(e1 / e0) / std::log(x1 / x0);
    }
    out.push_back(r);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_series_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "t,e_bulk,e_surf,e_total,bulk_mass,surf_mass,weighted_mass,l2_gap,linf_gap,newton_iters\n";
  for (const auto& r : traj.series) {
    out << format_double(r.t) << ',' << format_double(r.energy.e_bulk) << ','
        << format_double(r.energy.e_surf) << ',' << format_double(r.energy.e_total) << ','
        << format_double(r.mass.bulk) << ',' << format_double(r.mass.surf) << ','
        << format_double(r.mass.weighted) << ',' << format_double(r.gap.l2) << ','
        << format_double(r.gap.linf) << ',' << r.newton_iters << '\n';
  }
}

void write_eoc_csv(const std::filesystem::path& path, const std::vector<EocRow>& rows,
                   const std::string& abscissa_label) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << abscissa_label << ",err,eoc\n";
  for (const auto& r : rows) {
    out << format_double(r.x) << ',' << format_double(r.error) << ',';
    if (r.eoc) out << format_double(*r.eoc);
    out << '\n';
  }
}

}  // namespace chdbc
