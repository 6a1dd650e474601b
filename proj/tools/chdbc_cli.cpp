#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chdbc/assembly.hpp"
#include "chdbc/config.hpp"
#include "chdbc/error.hpp"
#include "chdbc/experiment.hpp"
#include "chdbc/mesh.hpp"
#include "chdbc/stepper.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

chdbc::RunConfig make_config(const std::string& path, const std::vector<std::string>& overrides) {
  chdbc::RunConfig config = path.empty() ? chdbc::RunConfig{} : chdbc::load_config(path);
  for (const auto& o : overrides) chdbc::apply_override(config, o);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cahn-Hilliard solver with reaction-rate dependent dynamic boundary conditions"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config_opts = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", overrides, "override, e.g. model.L=0.1 (repeatable)");
  };

  auto* run = app.add_subcommand("run", "single trajectory");
  add_config_opts(run);
  auto* sweep = app.add_subcommand("sweep", "L sweep with EOC tables");
  add_config_opts(sweep);
  auto* print = app.add_subcommand("print-config", "print the effective configuration");
  add_config_opts(print);
  auto* validate = app.add_subcommand("validate-mesh", "build and check the unit-square mesh");
  std::size_t mesh_n = 32;
  validate->add_option("-n", mesh_n, "cells per side")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  try {
    if (*validate) {
      const chdbc::Mesh mesh = chdbc::build_unit_square_mesh(mesh_n);
      const auto report = chdbc::validate_mesh(mesh);
      std::cout << "vertices " << mesh.n_vertices() << ", boundary " << mesh.n_boundary << ", triangles "
                << mesh.triangles.size() << '\n'
                << report.summary();
      return report.ok() ? 0 : 1;
    }
    const chdbc::RunConfig config = make_config(config_path, overrides);
    if (*print) {
      std::cout << chdbc::serialize_config(config);
      return 0;
    }
    if (*run) {
      chdbc::run_single(config, std::cout);
      return 0;
    }
    if (*sweep) {
      if (config.study.mode == chdbc::StudyMode::single) {
        std::cerr << "sweep: set study.mode to sweep_to_zero or sweep_to_infinity\n";
        return kConfigError;
      }
      const auto result = chdbc::run_sweep(config, std::cout);
      std::cout << "1/L or L, err_u, eoc\n";
      for (const auto& row : result.u_bulk)
        std::cout << row.x << ", " << row.error << ", " << (row.eoc ? std::to_string(*row.eoc) : "-") << '\n';
      return 0;
    }
  } catch (const chdbc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const chdbc::StepFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverError;
  } catch (const chdbc::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
