#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace chdbc {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;
using Edge = std::array<std::size_t, 2>;

/// Conforming triangulation of a polygonal domain together with the induced
/// partition of its boundary.
///
/// Vertices are ordered boundary-first: indices 0..n_boundary-1 lie on the
/// boundary, all remaining vertices are interior. Boundary-local numbering
/// (used by every boundary matrix) therefore coincides with the global
/// numbering restricted to the first n_boundary entries.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;     // counterclockwise
  std::vector<Edge> boundary_edges;    // counterclockwise along the boundary
  std::size_t n_boundary = 0;
  double h = 0.0;                      // max element diameter

  std::size_t n_vertices() const { return vertices.size(); }
  std::size_t n_interior() const { return vertices.size() - n_boundary; }
};

/// Structured mesh of the unit square with n cells per side. Every cell is
/// split along its lower-left to upper-right diagonal; boundary vertices are
/// numbered counterclockwise starting at the origin, interior vertices
/// follow in row-major order.
Mesh build_unit_square_mesh(std::size_t n);

double triangle_area(const Mesh& mesh, const Triangle& t);
double edge_length(const Mesh& mesh, const Edge& e);

struct MeshCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct MeshValidationReport {
  std::vector<MeshCheck> checks;

  bool ok() const;
  const MeshCheck* find(const std::string& name) const;
  std::string summary() const;
};

namespace check_names {
inline constexpr const char* kDegenerate = "degenerate triangle";
inline constexpr const char* kObtuse = "non-obtuse triangles";
inline constexpr const char* kBoundaryEdgeFaces = "boundary edge faces";
inline constexpr const char* kTiling = "domain tiling";
inline constexpr const char* kBoundaryTiling = "boundary tiling";
inline constexpr const char* kBoundaryFirst = "boundary-first ordering";
}  // namespace check_names

/// Checks the invariants the discretisation relies on: positive-area,
/// non-obtuse triangles, every boundary edge a face of exactly one triangle,
/// exact tiling of the unit square and its boundary, and boundary-first
/// vertex ordering. Never throws; failures are carried in the report.
MeshValidationReport validate_mesh(const Mesh& mesh);

}  // namespace chdbc
