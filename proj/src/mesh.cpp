#include "chdbc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace chdbc {

Mesh build_unit_square_mesh(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("build_unit_square_mesh: n must be >= 1");
  }
  const std::size_t np = n + 1;
  const double nd = static_cast<double>(n);

  // grid (i, j) -> vertex index
  std::vector<std::size_t> index(np * np, 0);
  auto grid = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return index[j * np + i];
  };

  Mesh mesh;
  auto add = [&](std::size_t i, std::size_t j) {
    grid(i, j) = mesh.vertices.size();
    mesh.vertices.push_back({static_cast<double>(i) / nd, static_cast<double>(j) / nd});
  };

  // Boundary, counterclockwise from (0,0).
  for (std::size_t i = 0; i < n; ++i) add(i, 0);
  for (std::size_t j = 0; j < n; ++j) add(n, j);
  for (std::size_t i = n; i > 0; --i) add(i, n);
  for (std::size_t j = n; j > 0; --j) add(0, j);
  mesh.n_boundary = mesh.vertices.size();

  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 1; i < n; ++i) add(i, j);

  mesh.triangles.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t p00 = grid(i, j);
      const std::size_t p10 = grid(i + 1, j);
      const std::size_t p01 = grid(i, j + 1);
      const std::size_t p11 = grid(i + 1, j + 1);
      mesh.triangles.push_back({p00, p10, p11});
      mesh.triangles.push_back({p00, p11, p01});
    }
  }

  const std::size_t nb = mesh.n_boundary;
  mesh.boundary_edges.reserve(nb);
  for (std::size_t k = 0; k < nb; ++k) mesh.boundary_edges.push_back({k, (k + 1) % nb});

  mesh.h = std::sqrt(2.0) / nd;
  return mesh;
}

double triangle_area(const Mesh& mesh, const Triangle& t) {
  const Point& a = mesh.vertices[t[0]];
  const Point& b = mesh.vertices[t[1]];
  const Point& c = mesh.vertices[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double edge_length(const Mesh& mesh, const Edge& e) {
  const Point& a = mesh.vertices[e[0]];
  const Point& b = mesh.vertices[e[1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

bool MeshValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const MeshCheck& c) { return c.passed; });
}

const MeshCheck* MeshValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string MeshValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << '\n';
  }
  return os.str();
}

namespace {

constexpr double kGeomTol = 1e-12;

bool on_unit_square_boundary(const Point& p) {
  return std::abs(p.x) < kGeomTol || std::abs(p.x - 1.0) < kGeomTol ||
         std::abs(p.y) < kGeomTol || std::abs(p.y - 1.0) < kGeomTol;
}

Edge sorted(Edge e) {
  if (e[0] > e[1]) std::swap(e[0], e[1]);
  return e;
}

}  // namespace

MeshValidationReport validate_mesh(const Mesh& mesh) {
  MeshValidationReport report;
  const std::size_t nv = mesh.vertices.size();

  MeshCheck indices{"vertex indices", true, {}};
  for (const auto& t : mesh.triangles)
    for (auto v : t)
      if (v >= nv) indices = {"vertex indices", false, "triangle references missing vertex"};
  for (const auto& e : mesh.boundary_edges)
    for (auto v : e)
      if (v >= nv) indices = {"vertex indices", false, "boundary edge references missing vertex"};
  if (mesh.n_boundary > nv) indices = {"vertex indices", false, "n_boundary exceeds vertex count"};
  report.checks.push_back(indices);
  if (!indices.passed) return report;

  // (S1): positive area, all angles <= 90 degrees.
  MeshCheck degenerate{check_names::kDegenerate, true, {}};
  MeshCheck obtuse{check_names::kObtuse, true, {}};
  double area_sum = 0.0;
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& t = mesh.triangles[k];
    const double area = triangle_area(mesh, t);
    double scale = 0.0;
    for (int i = 0; i < 3; ++i) scale = std::max(scale, edge_length(mesh, {t[i], t[(i + 1) % 3]}));
    if (!(area > kGeomTol * scale * scale)) {
      if (degenerate.passed) degenerate.detail = "triangle " + std::to_string(k) + " has non-positive area";
      degenerate.passed = false;
      continue;
    }
    area_sum += area;
    for (int i = 0; i < 3; ++i) {
      const Point& a = mesh.vertices[t[i]];
      const Point& b = mesh.vertices[t[(i + 1) % 3]];
      const Point& c = mesh.vertices[t[(i + 2) % 3]];
      const double dot = (b.x - a.x) * (c.x - a.x) + (b.y - a.y) * (c.y - a.y);
      if (dot < -kGeomTol * scale * scale) {
        if (obtuse.passed) obtuse.detail = "triangle " + std::to_string(k) + " is obtuse";
        obtuse.passed = false;
      }
    }
  }
  report.checks.push_back(degenerate);
  report.checks.push_back(obtuse);

  // Edge incidence: interior edges shared by two triangles, boundary edges by one.
  std::map<Edge, int> incidence;
  for (const auto& t : mesh.triangles)
    for (int i = 0; i < 3; ++i) ++incidence[sorted({t[i], t[(i + 1) % 3]})];

  MeshCheck faces{check_names::kBoundaryEdgeFaces, true, {}};
  std::map<Edge, int> boundary_set;
  for (const auto& e : mesh.boundary_edges) {
    ++boundary_set[sorted(e)];
    auto it = incidence.find(sorted(e));
    if (it == incidence.end() || it->second != 1) {
      faces.passed = false;
      faces.detail = "boundary edge (" + std::to_string(e[0]) + "," + std::to_string(e[1]) +
                     ") is not a face of exactly one triangle";
    }
  }
  report.checks.push_back(faces);

  MeshCheck tiling{check_names::kTiling, true, {}};
  for (const auto& [edge, count] : incidence) {
    if (count > 2 || (count == 1 && boundary_set.find(edge) == boundary_set.end())) {
      tiling.passed = false;
      tiling.detail = "edge (" + std::to_string(edge[0]) + "," + std::to_string(edge[1]) +
                      ") has inconsistent incidence";
      break;
    }
  }
  if (tiling.passed && std::abs(area_sum - 1.0) > 1e-12) {
    tiling.passed = false;
    std::ostringstream os;
    os << "triangle areas sum to " << area_sum;
    tiling.detail = os.str();
  }
  report.checks.push_back(tiling);

  MeshCheck btiling{check_names::kBoundaryTiling, true, {}};
  double length = 0.0;
  for (const auto& [edge, count] : boundary_set) {
    if (count != 1) {
      btiling.passed = false;
      btiling.detail = "duplicate boundary edge";
    }
    if (!on_unit_square_boundary(mesh.vertices[edge[0]]) ||
        !on_unit_square_boundary(mesh.vertices[edge[1]])) {
      btiling.passed = false;
      btiling.detail = "boundary edge with an interior endpoint";
    }
    length += edge_length(mesh, edge);
  }
  if (btiling.passed && std::abs(length - 4.0) > 1e-12) {
    btiling.passed = false;
    std::ostringstream os;
    os << "boundary edges sum to length " << length;
    btiling.detail = os.str();
  }
  report.checks.push_back(btiling);

  MeshCheck order{check_names::kBoundaryFirst, true, {}};
  for (std::size_t k = 0; k < nv; ++k) {
    const bool on_boundary = on_unit_square_boundary(mesh.vertices[k]);
    if (on_boundary != (k < mesh.n_boundary)) {
      order.passed = false;
      order.detail = "vertex " + std::to_string(k) + (on_boundary ? " lies on the boundary"
                                                                  : " is interior") +
                     " but n_boundary = " + std::to_string(mesh.n_boundary);
      break;
    }
  }
  report.checks.push_back(order);
  return report;
}

}  // namespace chdbc
