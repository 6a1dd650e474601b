#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chdbc/droplet.hpp"
#include "chdbc/params.hpp"
#include "chdbc/potential.hpp"
#include "chdbc/stepper.hpp"

namespace chdbc {

enum class PotentialKind { double_well, penalised };
enum class InitialKind { droplet, constant, file };
enum class StudyMode { single, sweep_to_zero, sweep_to_infinity };

struct PotentialConfig {
  PotentialKind bulk = PotentialKind::penalised;
  PotentialKind surf = PotentialKind::penalised;
  double delta_prime = 0.004;  // 1/250
};

struct InitialConfig {
  InitialKind kind = InitialKind::droplet;
  double cx = 0.1;
  double cy = 0.5;
  double a = 0.6814;
  double b = 0.367;
  std::optional<double> width;  // unset: sqrt(2) epsilon
  bool full_axis = false;
  double value = 1.0;           // constant initial state
  std::string file;             // restart file
};

struct OutputConfig {
  std::string dir = "out";
  std::size_t vtk_every = 0;    // 0 disables snapshots
  bool checkpoint = true;
};

struct StudyConfig {
  StudyMode mode = StudyMode::single;
  /// Sweep abscissae: L for sweep_to_zero, 1/L for sweep_to_infinity.
  std::vector<double> values{1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3};
};

/// Everything a run or a sweep needs. Defaults are the desk-scale setup.
struct RunConfig {
  std::size_t n = 32;
  ModelParams model = desk_model();
  std::size_t sample_stride = 17;
  PotentialConfig potential;
  InitialConfig initial;
  OutputConfig output;
  NewtonOptions solver;
  StudyConfig study;

  static ModelParams desk_model();

  std::size_t n_steps() const;
  DropletSpec droplet() const;
  SplitPotential bulk_potential() const;
  SplitPotential surf_potential() const;

  /// Throws ConfigError on any violated constraint.
  void validate() const;
};

/// INI-style text: [section] headers, key = value lines, '#' comments.
/// Unknown sections or keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

/// Applies one "section.key=value" override.
void apply_override(RunConfig& config, const std::string& assignment);
void set_config_value(RunConfig& config, const std::string& section, const std::string& key,
                      const std::string& value);

}  // namespace chdbc
