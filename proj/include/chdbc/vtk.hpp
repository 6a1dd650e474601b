#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "chdbc/mesh.hpp"

namespace chdbc {

/// Named nodal field for VTK output. Fields shorter than the vertex count
/// (e.g. boundary-only potentials) are padded with zeros.
struct PointField {
  std::string name;
  Eigen::VectorXd values;
};

/// Legacy ASCII VTK unstructured grid (triangles, cell type 5) with optional
/// point data.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
               const std::vector<PointField>& fields = {},
               const std::string& title = "chdbc mesh");

}  // namespace chdbc
