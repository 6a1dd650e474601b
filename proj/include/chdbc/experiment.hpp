#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "chdbc/assembly.hpp"
#include "chdbc/config.hpp"
#include "chdbc/diagnostics.hpp"
#include "chdbc/mesh.hpp"

namespace chdbc {

/// U0 for the configured initial condition (droplet, constant or restart file).
Vector initial_state(const RunConfig& config, const Mesh& mesh);

struct RunOutcome {
  Trajectory trajectory;
  std::string summary;
};

/// Runs one trajectory and writes series.csv, metadata.txt, optional VTK
/// snapshots and the final-state restart file into config.output.dir.
/// On step failure the partial series is written before StepFailure
/// propagates.
RunOutcome run_single(const RunConfig& config, std::ostream& log);

struct SweepMember {
  double abscissa = 0.0;  // L or 1/L
  Coupling coupling = Coupling::infinite();
  TrajectoryErrors errors;
  GapNorms gap;
};

struct SweepResult {
  std::vector<SweepMember> members;  // in increasing abscissa order
  GapNorms reference_gap;
  std::vector<EocRow> u_bulk, u_surf, mu_bulk, mu_surf;
  std::vector<EocRow> gap;  // abscissa L, increasing; includes L = 0 for sweeps toward zero
};

/// Reference run (L = 0 or L = inf by study mode) and one run per value,
/// all on the same mesh and time grid. Writes eoc_*.csv and one
/// subdirectory per member into config.output.dir.
SweepResult run_sweep(const RunConfig& config, std::ostream& log);

}  // namespace chdbc
