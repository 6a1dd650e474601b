#include "chdbc/assembly.hpp"

#include <stdexcept>
#include <vector>

namespace chdbc {

FemMatrices assemble(const Mesh& mesh) {
  const auto report = validate_mesh(mesh);
  if (!report.ok()) {
    throw std::invalid_argument("assemble: mesh rejected\n" + report.summary());
  }

  FemMatrices m;
  m.n_bulk = mesh.n_vertices();
  m.n_boundary = mesh.n_boundary;
  const auto nv = static_cast<Eigen::Index>(m.n_bulk);
  const auto nb = static_cast<Eigen::Index>(m.n_boundary);

  m.mass_bulk = Vector::Zero(nv);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const double area = triangle_area(mesh, t);
    // grad(chi_i) = rot90(x_{i+2} - x_{i+1}) / (2 |K|)
    double gx[3];
    double gy[3];
    for (int i = 0; i < 3; ++i) {
      const Point& b = mesh.vertices[t[(i + 1) % 3]];
      const Point& c = mesh.vertices[t[(i + 2) % 3]];
      gx[i] = (b.y - c.y) / (2.0 * area);
      gy[i] = (c.x - b.x) / (2.0 * area);
    }
    for (int i = 0; i < 3; ++i) {
      m.mass_bulk[static_cast<Eigen::Index>(t[i])] += area / 3.0;
      for (int j = 0; j < 3; ++j) {
        triplets.emplace_back(static_cast<int>(t[i]), static_cast<int>(t[j]),
                              area * (gx[i] * gx[j] + gy[i] * gy[j]));
      }
    }
  }
  m.stiff_bulk.resize(nv, nv);
  m.stiff_bulk.setFromTriplets(triplets.begin(), triplets.end());
  m.stiff_bulk.makeCompressed();

  m.mass_boundary = Vector::Zero(nb);
  triplets.clear();
  for (const auto& e : mesh.boundary_edges) {
    const double len = edge_length(mesh, e);
    const int a = static_cast<int>(e[0]);
    const int b = static_cast<int>(e[1]);
    m.mass_boundary[a] += 0.5 * len;
    m.mass_boundary[b] += 0.5 * len;
    triplets.emplace_back(a, a, 1.0 / len);
    triplets.emplace_back(b, b, 1.0 / len);
    triplets.emplace_back(a, b, -1.0 / len);
    triplets.emplace_back(b, a, -1.0 / len);
  }
  m.stiff_boundary.resize(nb, nb);
  m.stiff_boundary.setFromTriplets(triplets.begin(), triplets.end());
  m.stiff_boundary.makeCompressed();
  return m;
}

IndexMaps::IndexMaps(std::size_t n_bulk, std::size_t n_boundary)
    : n_bulk_(n_bulk), n_boundary_(n_boundary) {
  if (n_boundary > n_bulk) throw std::invalid_argument("IndexMaps: n_boundary > n_bulk");
}

IndexMaps::IndexMaps(const Mesh& mesh) : IndexMaps(mesh.n_vertices(), mesh.n_boundary) {}

Vector IndexMaps::restrict_boundary(const Vector& bulk) const {
  if (static_cast<std::size_t>(bulk.size()) != n_bulk_)
    throw std::invalid_argument("restrict_boundary: size mismatch");
  return bulk.head(static_cast<Eigen::Index>(n_boundary_));
}

Vector IndexMaps::restrict_interior(const Vector& bulk) const {
  if (static_cast<std::size_t>(bulk.size()) != n_bulk_)
    throw std::invalid_argument("restrict_interior: size mismatch");
  return bulk.tail(static_cast<Eigen::Index>(n_interior()));
}

Vector IndexMaps::extend_zero(const Vector& boundary) const {
  if (static_cast<std::size_t>(boundary.size()) != n_boundary_)
    throw std::invalid_argument("extend_zero: size mismatch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n_bulk_));
  out.head(static_cast<Eigen::Index>(n_boundary_)) = boundary;
  return out;
}

SparseMatrix IndexMaps::block(const SparseMatrix& a, Block which) const {
  if (static_cast<std::size_t>(a.rows()) != n_bulk_ || static_cast<std::size_t>(a.cols()) != n_bulk_)
    throw std::invalid_argument("IndexMaps::block: matrix is not n_bulk x n_bulk");
  const auto nb = static_cast<Eigen::Index>(n_boundary_);
  const auto ni = static_cast<Eigen::Index>(n_interior());
  const auto no = static_cast<Eigen::Index>(n_bulk_);
  switch (which) {
    case Block::GG: return a.block(0, 0, nb, nb);
    case Block::GI: return a.block(0, nb, nb, ni);
    case Block::IG: return a.block(nb, 0, ni, nb);
    case Block::II: return a.block(nb, nb, ni, ni);
    case Block::GO: return a.block(0, 0, nb, no);
    case Block::IO: return a.block(nb, 0, ni, no);
    case Block::OG: return a.block(0, 0, no, nb);
    case Block::OI: return a.block(0, nb, no, ni);
  }
  throw std::invalid_argument("IndexMaps::block: unknown block");
}

}  // namespace chdbc
