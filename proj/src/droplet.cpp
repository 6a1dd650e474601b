#include "chdbc/droplet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chdbc {

void DropletSpec::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(w > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
      !std::isfinite(w))
    throw std::invalid_argument("droplet: a, b and w must be positive and finite");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw std::invalid_argument("droplet: center must be finite");
}

double droplet_profile(const DropletSpec& spec, const Point& p) {
  const double sa = spec.semi_a();
  const double sb = spec.semi_b();
  const double rho = std::hypot((p.x - spec.cx) / sa, (p.y - spec.cy) / sb);
  const double phi = (1.0 - rho) * std::min(sa, sb);
  return std::clamp(std::tanh(phi / spec.w), -1.0, 1.0);
}

Vector initial_droplet(const Mesh& mesh, const DropletSpec& spec) {
  spec.validate();
  Vector U(static_cast<Eigen::Index>(mesh.n_vertices()));
  for (std::size_t k = 0; k < mesh.n_vertices(); ++k)
    U[static_cast<Eigen::Index>(k)] = droplet_profile(spec, mesh.vertices[k]);
  return U;
}

}  // namespace chdbc
