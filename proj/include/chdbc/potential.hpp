#pragma once

#include <functional>
#include <string>

namespace chdbc {

/// A potential written as F = F1 + F2 with F1 convex (treated implicitly in
/// time) and F2 concave with globally Lipschitz derivative (treated
/// explicitly). `lipschitz` is the declared Lipschitz constant of F2'.
struct SplitPotential {
  std::string name;
  std::function<double(double)> convex;          // F1
  std::function<double(double)> convex_d1;       // F1'
  std::function<double(double)> convex_d2;       // F1''
  std::function<double(double)> concave;         // F2
  std::function<double(double)> concave_d1;      // F2'
  double lipschitz = 0.0;

  double value(double s) const { return convex(s) + concave(s); }
  double derivative(double s) const { return convex_d1(s) + concave_d1(s); }
};

/// W(s) = 1/4 (s^2 - 1)^2 split as F1 = s^4/4 + 1/4, F2 = -s^2/2.
SplitPotential double_well();

/// Double well plus the convex penalty (1/delta') max(|s| - 1, 0)^2, which is
/// assigned to F1. Throws std::invalid_argument unless delta_prime > 0.
SplitPotential penalised_double_well(double delta_prime);

}  // namespace chdbc
