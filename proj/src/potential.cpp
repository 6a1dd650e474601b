#include "chdbc/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace chdbc {

SplitPotential double_well() {
  SplitPotential p;
  p.name = "double_well";
  p.convex = [](double s) { return 0.25 * s * s * s * s + 0.25; };
  p.convex_d1 = [](double s) { return s * s * s; };
  p.convex_d2 = [](double s) { return 3.0 * s * s; };
  p.concave = [](double s) { return -0.5 * s * s; };
  p.concave_d1 = [](double s) { return -s; };
  p.lipschitz = 1.0;
  return p;
}

SplitPotential penalised_double_well(double delta_prime) {
  if (!(delta_prime > 0.0) || !std::isfinite(delta_prime)) {
    throw std::invalid_argument("penalised_double_well: delta' must be positive and finite");
  }
  const double k = 1.0 / delta_prime;
  SplitPotential p = double_well();
  p.name = "penalised_double_well";
  p.convex = [k](double s) {
    const double excess = std::max(std::abs(s) - 1.0, 0.0);
    return 0.25 * s * s * s * s + 0.25 + k * excess * excess;
  };
  p.convex_d1 = [k](double s) {
    const double excess = std::max(std::abs(s) - 1.0, 0.0);
    return s * s * s + 2.0 * k * std::copysign(excess, s);
  };
  p.convex_d2 = [k](double s) { return 3.0 * s * s + (std::abs(s) > 1.0 ? 2.0 * k : 0.0); };
  return p;
}

}  // namespace chdbc
