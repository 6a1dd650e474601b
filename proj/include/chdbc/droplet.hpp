#pragma once

#include "chdbc/assembly.hpp"
#include "chdbc/mesh.hpp"

namespace chdbc {

/// Elliptic droplet. a and b are the horizontal and vertical elongations,
/// read as semi-axes unless full_axis is set (then halved).
struct DropletSpec {
  double cx = 0.1;
  double cy = 0.5;
  double a = 0.6814;
  double b = 0.367;
  double w = 0.02 * 1.4142135623730951;  // sqrt(2) eps at desk scale
  bool full_axis = false;

  void validate() const;
  double semi_a() const { return full_axis ? 0.5 * a : a; }
  double semi_b() const { return full_axis ? 0.5 * b : b; }
};

/// Nodal interpolant of tanh(phi / w), phi = (1 - rho) min(a, b), with rho
/// the normalised elliptic radius. Positive inside the droplet.
double droplet_profile(const DropletSpec& spec, const Point& p);
Vector initial_droplet(const Mesh& mesh, const DropletSpec& spec);

}  // namespace chdbc
