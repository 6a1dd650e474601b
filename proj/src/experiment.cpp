#include "chdbc/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "chdbc/checkpoint.hpp"
#include "chdbc/error.hpp"
#include "chdbc/stepper.hpp"
#include "chdbc/vtk.hpp"

namespace chdbc {

namespace fs = std::filesystem;

namespace {

void write_metadata(const fs::path& dir, const RunConfig& config) {
  std::ofstream out(dir / "metadata.txt");
  const DropletSpec d = config.droplet();
  out << "# initial profile: tanh(phi / w), phi = (1 - rho) min(a, b), clamped to [-1, 1]\n"
      << "# droplet width w = " << format_double(d.w)
      << (config.initial.width ? " (configured)\n" : " (sqrt(2) epsilon)\n")
      << "# elongations a, b read as " << (d.full_axis ? "full axes" : "semi-axes")
      << ", ellipse clipped by the domain\n"
      << "# error norms: lumped (nodal quadrature) L2 norms\n"
      << "# coarse sample spacing = " << format_double(static_cast<double>(config.sample_stride) * config.model.tau)
      << '\n'
      << serialize_config(config);
}

std::string vtk_name(std::size_t step) {
  std::ostringstream os;
  os << "u_" << step << ".vtk";
  return os.str();
}

void write_snapshot(const fs::path& path, const Mesh& mesh, const Vector& U, const Potentials& mu) {
  write_vtk(path, mesh,
            {{"u", U}, {"mu_bulk", mu.mu_bulk}, {"mu_surf", mu.mu_surf}},
            "phase field");
}

std::string summarize(const Trajectory& traj) {
  const StepRecord& r = traj.series.back();
  std::ostringstream os;
  os << "t=" << format_double(r.t) << " energy=" << format_double(r.energy.e_total)
     << " bulk_mass=" << format_double(r.mass.bulk) << " surf_mass=" << format_double(r.mass.surf)
     << " weighted_mass=" << format_double(r.mass.weighted) << " gap_l2=" << format_double(r.gap.l2);
  return os.str();
}

// One trajectory with on-the-fly outputs; StepFailure leaves the partial series behind.
Trajectory simulate(const RunConfig& config, const Mesh& mesh, const FemMatrices& fem, const Vector& U0,
                    const fs::path& dir) {
  fs::create_directories(dir);
  write_metadata(dir, config);
  Stepper stepper(fem, config.model, config.bulk_potential(), config.surf_potential(), config.solver);
  StepObserver observer;
  if (config.output.vtk_every > 0) {
    observer = [&](const StepRecord& r, const Vector& U, const Potentials& mu) {
      if (r.step % config.output.vtk_every == 0) write_snapshot(dir / vtk_name(r.step), mesh, U, mu);
    };
  }
  try {
    Trajectory traj = run(stepper, U0, config.n_steps(), config.sample_stride, observer);
    write_series_csv(dir / "series.csv", traj);
    if (config.output.checkpoint) write_checkpoint(dir / "final.bin", traj.U_final);
    return traj;
  } catch (const StepFailure& f) {
    write_series_csv(dir / "series.csv", f.partial());
    if (config.output.checkpoint) write_checkpoint(dir / "last_good.bin", f.partial().U_final);
    throw;
  }
}

std::vector<EocRow> table(const std::vector<SweepMember>& members, double TrajectoryErrors::*field) {
  std::vector<std::pair<double, double>> rows;
  for (const auto& m : members) rows.emplace_back(m.abscissa, m.errors.*field);
  return eoc_table(rows);
}

}  // namespace

Vector initial_state(const RunConfig& config, const Mesh& mesh) {
  const auto nv = static_cast<Eigen::Index>(mesh.n_vertices());
  switch (config.initial.kind) {
    case InitialKind::droplet:
      return initial_droplet(mesh, config.droplet());
    case InitialKind::constant:
      return Vector::Constant(nv, config.initial.value);
    case InitialKind::file: {
      Vector U = read_checkpoint(config.initial.file);
      if (U.size() != nv)
        throw ConfigError("initial.file holds " + std::to_string(U.size()) + " values, mesh has " +
                          std::to_string(nv) + " vertices");
      return U;
    }
  }
  throw ConfigError("unknown initial condition");
}

RunOutcome run_single(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Mesh mesh = build_unit_square_mesh(config.n);
  const FemMatrices fem = assemble(mesh);
  const Vector U0 = initial_state(config, mesh);
  log << "run: n=" << config.n << " L=" << config.model.coupling.to_string() << " steps=" << config.n_steps()
      << '\n';
  RunOutcome out;
  out.trajectory = simulate(config, mesh, fem, U0, config.output.dir);
  out.summary = summarize(out.trajectory);
  std::ofstream(fs::path(config.output.dir) / "summary.txt") << out.summary << '\n';
  log << out.summary << '\n';
  return out;
}

SweepResult run_sweep(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.study.mode == StudyMode::single) throw ConfigError("run_sweep: study.mode is single");
  const bool to_zero = config.study.mode == StudyMode::sweep_to_zero;
  const Mesh mesh = build_unit_square_mesh(config.n);
  const FemMatrices fem = assemble(mesh);
  const Vector U0 = initial_state(config, mesh);
  const fs::path root = config.output.dir;
  fs::create_directories(root);
  const double coarse_dt = static_cast<double>(config.sample_stride) * config.model.tau;

  auto member_config = [&](const Coupling& L, const std::string& sub) {
    RunConfig c = config;
    c.model.coupling = L;
    c.study.mode = StudyMode::single;
    c.output.dir = (root / sub).string();
    return c;
  };

  const Coupling ref_L = to_zero ? Coupling::finite(0.0) : Coupling::infinite();
  log << "sweep: reference L=" << ref_L.to_string() << '\n';
  const Trajectory reference = simulate(member_config(ref_L, "reference"), mesh, fem, U0, root / "reference");

  SweepResult result;
  result.reference_gap = trajectory_gap(reference, fem, config.model.beta);
  std::ofstream status(root / "sweep_status.txt");
  for (double v : config.study.values) {
    const Coupling L = Coupling::finite(to_zero ? v : 1.0 / v);
    log << "sweep: L=" << L.to_string() << '\n';
    Trajectory traj;
    try {
      traj = simulate(member_config(L, "L_" + L.to_string()), mesh, fem, U0, root / ("L_" + L.to_string()));
    } catch (const StepFailure&) {
      status << "partial: member L=" << L.to_string() << " failed\n";
      status.flush();
      throw;
    }
    SweepMember m;
    m.abscissa = v;
    m.coupling = L;
    m.errors = trajectory_error(traj, reference, fem, coarse_dt);
    m.gap = trajectory_gap(traj, fem, config.model.beta);
    result.members.push_back(m);
  }
  status << "complete\n";

  result.u_bulk = table(result.members, &TrajectoryErrors::u_bulk);
  result.u_surf = table(result.members, &TrajectoryErrors::u_surf);
  result.mu_bulk = table(result.members, &TrajectoryErrors::mu_bulk);
  result.mu_surf = table(result.members, &TrajectoryErrors::mu_surf);

  std::vector<std::pair<double, double>> gap_rows;
  for (const auto& m : result.members) gap_rows.emplace_back(m.coupling.value(), m.gap.l2);
  if (!to_zero) std::reverse(gap_rows.begin(), gap_rows.end());
  result.gap = eoc_table(gap_rows);
  if (to_zero) result.gap.insert(result.gap.begin(), EocRow{0.0, result.reference_gap.l2, std::nullopt});

  const std::string label = to_zero ? "L" : "1/L";
  write_eoc_csv(root / "eoc_u.csv", result.u_bulk, label);
  write_eoc_csv(root / "eoc_ugamma.csv", result.u_surf, label);
  write_eoc_csv(root / "eoc_muO.csv", result.mu_bulk, label);
  write_eoc_csv(root / "eoc_muG.csv", result.mu_surf, label);
  write_eoc_csv(root / "eoc_gap.csv", result.gap, "L");
  return result;
}

}  // namespace chdbc
