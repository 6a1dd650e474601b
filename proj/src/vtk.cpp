#include "chdbc/vtk.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace chdbc {

void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
               const std::vector<PointField>& fields, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);

  const std::size_t nv = mesh.n_vertices();
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& p : mesh.vertices) out << p.x << ' ' << p.y << " 0\n";

  const std::size_t nt = mesh.triangles.size();
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t k = 0; k < nt; ++k) out << "5\n";

  if (fields.empty()) return;
  out << "POINT_DATA " << nv << '\n';
  for (const auto& f : fields) {
    if (static_cast<std::size_t>(f.values.size()) > nv)
      throw std::invalid_argument("write_vtk: field '" + f.name + "' longer than vertex count");
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t k = 0; k < nv; ++k)
      out << (k < static_cast<std::size_t>(f.values.size()) ? f.values[static_cast<Eigen::Index>(k)] : 0.0)
          << '\n';
  }
}

}  // namespace chdbc
