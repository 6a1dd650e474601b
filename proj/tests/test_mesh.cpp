#include <gtest/gtest.h>

#include <cmath>

#include "chdbc/mesh.hpp"

using namespace chdbc;

namespace {

// Compensated summation, so the check measures the mesh rather than the sum.
struct KahanSum {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

TEST(Mesh, SmallestSquare) {
  const Mesh m = build_unit_square_mesh(1);
  EXPECT_EQ(m.n_vertices(), 4u);
  EXPECT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.boundary_edges.size(), 4u);
  EXPECT_EQ(m.n_boundary, 4u);
  EXPECT_DOUBLE_EQ(m.h, std::sqrt(2.0));
}

TEST(Mesh, TwoByTwoCountsAndArea) {
  const Mesh m = build_unit_square_mesh(2);
  EXPECT_EQ(m.n_vertices(), 9u);
  EXPECT_EQ(m.n_boundary, 8u);
  EXPECT_EQ(m.n_interior(), 1u);
  double area = 0.0;
  for (const auto& t : m.triangles) area += triangle_area(m, t);
  EXPECT_NEAR(area, 1.0, 1e-15);
  // the only interior vertex is the center
  EXPECT_DOUBLE_EQ(m.vertices[8].x, 0.5);
  EXPECT_DOUBLE_EQ(m.vertices[8].y, 0.5);
}

TEST(Mesh, FullResolutionMeshWidth) {
  const Mesh m = build_unit_square_mesh(256);
  EXPECT_DOUBLE_EQ(m.h, std::sqrt(2.0) * std::pow(2.0, -8));
  EXPECT_EQ(m.n_vertices(), 257u * 257u);
}

TEST(Mesh, RejectsZero) { EXPECT_THROW(build_unit_square_mesh(0), std::invalid_argument); }

TEST(Mesh, CountsAndTilingForManySizes) {
  for (std::size_t n = 1; n <= 24; ++n) {
    const Mesh m = build_unit_square_mesh(n);
    EXPECT_EQ(m.n_vertices(), (n + 1) * (n + 1));
    EXPECT_EQ(m.triangles.size(), 2 * n * n);
    EXPECT_EQ(m.boundary_edges.size(), 4 * n);
    EXPECT_EQ(m.n_boundary, 4 * n);
    KahanSum area, length;
    for (const auto& t : m.triangles) {
      const double a = triangle_area(m, t);
      EXPECT_GT(a, 0.0);
      area.add(a);
    }
    for (const auto& e : m.boundary_edges) length.add(edge_length(m, e));
    EXPECT_NEAR(area.sum, 1.0, 1e-14);
    EXPECT_NEAR(length.sum, 4.0, 4e-14);
  }
}

TEST(Mesh, EveryTriangleIsRightAngled) {
  const Mesh m = build_unit_square_mesh(7);
  for (const auto& t : m.triangles) {
    int right = 0;
    for (int i = 0; i < 3; ++i) {
      const Point& a = m.vertices[t[i]];
      const Point& b = m.vertices[t[(i + 1) % 3]];
      const Point& c = m.vertices[t[(i + 2) % 3]];
      const double dot = (b.x - a.x) * (c.x - a.x) + (b.y - a.y) * (c.y - a.y);
      EXPECT_GE(dot, -1e-15);
      if (std::abs(dot) < 1e-15) ++right;
    }
    EXPECT_EQ(right, 1);
  }
}

TEST(Mesh, BoundaryIsCounterclockwiseFromOrigin) {
  const Mesh m = build_unit_square_mesh(3);
  EXPECT_DOUBLE_EQ(m.vertices[0].x, 0.0);
  EXPECT_DOUBLE_EQ(m.vertices[0].y, 0.0);
  double signed_area = 0.0;
  for (const auto& e : m.boundary_edges) {
    const Point& a = m.vertices[e[0]];
    const Point& b = m.vertices[e[1]];
    signed_area += 0.5 * (a.x * b.y - b.x * a.y);
  }
  EXPECT_NEAR(signed_area, 1.0, 1e-14);
}

TEST(MeshValidation, StructuredMeshPasses) {
  const auto report = validate_mesh(build_unit_square_mesh(4));
  EXPECT_TRUE(report.ok()) << report.summary();
}

TEST(MeshValidation, DuplicatedVertexIsDegenerate) {
  Mesh m = build_unit_square_mesh(4);
  // Collapse an interior vertex onto its right neighbour.
  const std::size_t nb = m.n_boundary;
  m.vertices[nb] = m.vertices[nb + 1];
  const auto report = validate_mesh(m);
  ASSERT_NE(report.find(check_names::kDegenerate), nullptr);
  EXPECT_FALSE(report.find(check_names::kDegenerate)->passed);
  EXPECT_FALSE(report.ok());
}

TEST(MeshValidation, InteriorVertexFirstBreaksOrdering) {
  Mesh m = build_unit_square_mesh(4);
  const std::size_t a = 0, b = m.n_boundary;
  std::swap(m.vertices[a], m.vertices[b]);
  auto relabel = [&](std::size_t& v) {
    if (v == a) v = b;
    else if (v == b) v = a;
  };
  for (auto& t : m.triangles)
    for (auto& v : t) relabel(v);
  for (auto& e : m.boundary_edges)
    for (auto& v : e) relabel(v);
  const auto report = validate_mesh(m);
  EXPECT_FALSE(report.find(check_names::kBoundaryFirst)->passed);
  EXPECT_TRUE(report.find(check_names::kDegenerate)->passed);
  EXPECT_TRUE(report.find(check_names::kTiling)->passed);
}

TEST(MeshValidation, ShiftedVertexMakesObtuseTriangle) {
  Mesh m = build_unit_square_mesh(4);
  m.vertices[m.n_boundary].x += 0.05;
  const auto report = validate_mesh(m);
  EXPECT_FALSE(report.find(check_names::kObtuse)->passed);
  EXPECT_TRUE(report.find(check_names::kDegenerate)->passed);
}

TEST(MeshValidation, MissingTriangleBreaksTiling) {
  Mesh m = build_unit_square_mesh(3);
  m.triangles.pop_back();
  const auto report = validate_mesh(m);
  EXPECT_FALSE(report.ok());
  EXPECT_FALSE(report.find(check_names::kTiling)->passed && report.find(check_names::kBoundaryEdgeFaces)->passed);
}

TEST(MeshValidation, MissingBoundaryEdgeBreaksBoundaryTiling) {
  Mesh m = build_unit_square_mesh(3);
  m.boundary_edges.pop_back();
  const auto report = validate_mesh(m);
  EXPECT_FALSE(report.ok());
}
