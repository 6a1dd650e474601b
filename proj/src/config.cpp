#include "chdbc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chdbc/diagnostics.hpp"
#include "chdbc/error.hpp"

namespace chdbc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const std::size_t s = to_size(key, v);
  if (s > 1000000) throw ConfigError(key + ": value too large");
  return static_cast<int>(s);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

PotentialKind to_potential(const std::string& key, const std::string& v) {
  if (v == "double_well") return PotentialKind::double_well;
  if (v == "penalised") return PotentialKind::penalised;
  throw ConfigError(key + ": expected double_well or penalised, got '" + v + "'");
}

const char* name(PotentialKind k) { return k == PotentialKind::double_well ? "double_well" : "penalised"; }

const char* name(InitialKind k) {
  switch (k) {
    case InitialKind::droplet: return "droplet";
    case InitialKind::constant: return "constant";
    case InitialKind::file: return "file";
  }
  return "";
}

const char* name(StudyMode m) {
  switch (m) {
    case StudyMode::single: return "single";
    case StudyMode::sweep_to_zero: return "sweep_to_zero";
    case StudyMode::sweep_to_infinity: return "sweep_to_infinity";
  }
  return "";
}

SplitPotential make_potential(PotentialKind k, double delta_prime) {
  return k == PotentialKind::double_well ? double_well() : penalised_double_well(delta_prime);
}

}  // namespace

ModelParams RunConfig::desk_model() {
  ModelParams p;
  p.epsilon = 0.02;
  p.delta = 0.04;
  p.tau = 1e-5;
  p.T = 5e-3;
  return p;
}

std::size_t RunConfig::n_steps() const {
  const double ratio = model.T / model.tau;
  return static_cast<std::size_t>(std::llround(std::floor(ratio + 1e-9 * ratio)));
}

DropletSpec RunConfig::droplet() const {
  DropletSpec d;
  d.cx = initial.cx;
  d.cy = initial.cy;
  d.a = initial.a;
  d.b = initial.b;
  d.w = initial.width.value_or(std::sqrt(2.0) * model.epsilon);
  d.full_axis = initial.full_axis;
  return d;
}

SplitPotential RunConfig::bulk_potential() const { return make_potential(potential.bulk, potential.delta_prime); }
SplitPotential RunConfig::surf_potential() const { return make_potential(potential.surf, potential.delta_prime); }

void RunConfig::validate() const {
  try {
    model.validate();
    if (initial.kind == InitialKind::droplet) droplet().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n == 0) throw ConfigError("mesh.n must be >= 1");
  if (sample_stride == 0) throw ConfigError("time.sample_stride must be >= 1");
  if (!(potential.delta_prime > 0.0)) throw ConfigError("potential.delta_prime must be positive");
  if (initial.kind == InitialKind::file && initial.file.empty())
    throw ConfigError("initial.file is required for kind = file");
  if (!(solver.tol_abs >= 0.0) || !(solver.tol_rel >= 0.0) || solver.tol_abs + solver.tol_rel <= 0.0)
    throw ConfigError("solver tolerances must be nonnegative and not both zero");
  if (solver.max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
  if (!(solver.equivalence_tol > 0.0)) throw ConfigError("solver.equivalence_tol must be positive");
  if (study.mode != StudyMode::single) {
    for (std::size_t i = 0; i < study.values.size(); ++i) {
      if (!(study.values[i] > 0.0)) throw ConfigError("study.values must be positive");
      if (i > 0 && !(study.values[i] > study.values[i - 1]))
        throw ConfigError("study.values must be strictly increasing");
    }
  }
}

void set_config_value(RunConfig& c, const std::string& section, const std::string& key,
                      const std::string& value) {
  const std::string full = section + "." + key;
  auto unknown = [&]() { return ConfigError("unknown configuration key '" + full + "'"); };
  if (section == "mesh") {
    if (key == "n") c.n = to_size(full, value);
    else throw unknown();
  } else if (section == "model") {
    if (key == "epsilon") c.model.epsilon = to_double(full, value);
    else if (key == "delta") c.model.delta = to_double(full, value);
    else if (key == "kappa") c.model.kappa = to_double(full, value);
    else if (key == "m_bulk") c.model.m_bulk = to_double(full, value);
    else if (key == "m_surf") c.model.m_surf = to_double(full, value);
    else if (key == "beta") c.model.beta = to_double(full, value);
    else if (key == "L") {
      try {
        c.model.coupling = Coupling::parse(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(full + ": " + e.what());
      }
    } else throw unknown();
  } else if (section == "time") {
    if (key == "tau") c.model.tau = to_double(full, value);
    else if (key == "T") c.model.T = to_double(full, value);
    else if (key == "sample_stride") c.sample_stride = to_size(full, value);
    else throw unknown();
  } else if (section == "potential") {
    if (key == "bulk") c.potential.bulk = to_potential(full, value);
    else if (key == "surf") c.potential.surf = to_potential(full, value);
    else if (key == "delta_prime") c.potential.delta_prime = to_double(full, value);
    else throw unknown();
  } else if (section == "initial") {
    if (key == "kind") {
      if (value == "droplet") c.initial.kind = InitialKind::droplet;
      else if (value == "constant") c.initial.kind = InitialKind::constant;
      else if (value == "file") c.initial.kind = InitialKind::file;
      else throw ConfigError(full + ": expected droplet, constant or file");
    } else if (key == "cx") c.initial.cx = to_double(full, value);
    else if (key == "cy") c.initial.cy = to_double(full, value);
    else if (key == "a") c.initial.a = to_double(full, value);
    else if (key == "b") c.initial.b = to_double(full, value);
    else if (key == "width") {
      if (value == "auto") c.initial.width.reset();
      else c.initial.width = to_double(full, value);
    } else if (key == "axis") {
      if (value == "semi") c.initial.full_axis = false;
      else if (value == "full") c.initial.full_axis = true;
      else throw ConfigError(full + ": expected semi or full");
    } else if (key == "value") c.initial.value = to_double(full, value);
    else if (key == "file") c.initial.file = value;
    else throw unknown();
  } else if (section == "output") {
    if (key == "dir") c.output.dir = value;
    else if (key == "vtk_every") c.output.vtk_every = to_size(full, value);
    else if (key == "checkpoint") c.output.checkpoint = to_bool(full, value);
    else throw unknown();
  } else if (section == "solver") {
    if (key == "tol_abs") c.solver.tol_abs = to_double(full, value);
    else if (key == "tol_rel") c.solver.tol_rel = to_double(full, value);
    else if (key == "max_iter") c.solver.max_iter = to_int(full, value);
    else if (key == "max_halvings") c.solver.max_halvings = to_int(full, value);
    else if (key == "equivalence_tol") c.solver.equivalence_tol = to_double(full, value);
    else if (key == "retry_halving") c.solver.retry_halving = to_bool(full, value);
    else throw unknown();
  } else if (section == "study") {
    if (key == "mode") {
      if (value == "single") c.study.mode = StudyMode::single;
      else if (value == "sweep_to_zero") c.study.mode = StudyMode::sweep_to_zero;
      else if (value == "sweep_to_infinity") c.study.mode = StudyMode::sweep_to_infinity;
      else throw ConfigError(full + ": expected single, sweep_to_zero or sweep_to_infinity");
    } else if (key == "values") c.study.values = to_list(full, value);
    else throw unknown();
  } else {
    throw ConfigError("unknown configuration section '" + section + "'");
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
    set_config_value(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  set_config_value(config, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
                   trim(assignment.substr(eq + 1)));
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  auto d = [](double v) { return format_double(v); };
  os << "[mesh]\n"
     << "n = " << c.n << "\n\n"
     << "[model]\n"
     << "epsilon = " << d(c.model.epsilon) << '\n'
     << "delta = " << d(c.model.delta) << '\n'
     << "kappa = " << d(c.model.kappa) << '\n'
     << "m_bulk = " << d(c.model.m_bulk) << '\n'
     << "m_surf = " << d(c.model.m_surf) << '\n'
     << "beta = " << d(c.model.beta) << '\n'
     << "L = " << c.model.coupling.to_string() << "\n\n"
     << "[time]\n"
     << "tau = " << d(c.model.tau) << '\n'
     << "T = " << d(c.model.T) << '\n'
     << "sample_stride = " << c.sample_stride << "\n\n"
     << "[potential]\n"
     << "bulk = " << name(c.potential.bulk) << '\n'
     << "surf = " << name(c.potential.surf) << '\n'
     << "delta_prime = " << d(c.potential.delta_prime) << "\n\n"
     << "[initial]\n"
     << "kind = " << name(c.initial.kind) << '\n'
     << "cx = " << d(c.initial.cx) << '\n'
     << "cy = " << d(c.initial.cy) << '\n'
     << "a = " << d(c.initial.a) << '\n'
     << "b = " << d(c.initial.b) << '\n'
     << "width = " << (c.initial.width ? d(*c.initial.width) : std::string("auto")) << '\n'
     << "axis = " << (c.initial.full_axis ? "full" : "semi") << '\n'
     << "value = " << d(c.initial.value) << '\n'
     << "file = " << c.initial.file << "\n\n"
     << "[output]\n"
     << "dir = " << c.output.dir << '\n'
     << "vtk_every = " << c.output.vtk_every << '\n'
     << "checkpoint = " << (c.output.checkpoint ? "true" : "false") << "\n\n"
     << "[solver]\n"
     << "tol_abs = " << d(c.solver.tol_abs) << '\n'
     << "tol_rel = " << d(c.solver.tol_rel) << '\n'
     << "max_iter = " << c.solver.max_iter << '\n'
     << "max_halvings = " << c.solver.max_halvings << '\n'
     << "equivalence_tol = " << d(c.solver.equivalence_tol) << '\n'
     << "retry_halving = " << (c.solver.retry_halving ? "true" : "false") << "\n\n"
     << "[study]\n"
     << "mode = " << name(c.study.mode) << '\n'
     << "values = ";
  for (std::size_t i = 0; i < c.study.values.size(); ++i) os << (i ? ", " : "") << d(c.study.values[i]);
  os << '\n';
  return os.str();
}

}  // namespace chdbc
