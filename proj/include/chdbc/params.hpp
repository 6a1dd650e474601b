#pragma once

#include <string>

namespace chdbc {

/// Reaction-rate coupling parameter L in [0, inf]. Infinity is a tag, never
/// a floating-point infinity.
class Coupling {
 public:
  static Coupling finite(double value);
  static Coupling infinite() { return Coupling(0.0, true); }

  bool is_infinite() const { return infinite_; }
  bool is_zero() const { return !infinite_ && value_ == 0.0; }
  /// Only meaningful for finite couplings.
  double value() const;

  std::string to_string() const;
  /// Accepts a nonnegative number or "inf"/"infinity".
  static Coupling parse(const std::string& text);

  friend bool operator==(const Coupling&, const Coupling&) = default;

 private:
  Coupling(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_ = 0.0;
  bool infinite_ = false;
};

struct ModelParams {
  double epsilon = 0.01;   // bulk interface width
  double delta = 0.02;     // surface interface width
  double kappa = 0.25;     // surface diffusion weight
  double m_bulk = 1.0;     // mobility in the bulk
  double m_surf = 0.4;     // mobility on the boundary
  double beta = 4.0;       // bulk/surface potential weight
  Coupling coupling = Coupling::infinite();
  double tau = 6e-7;       // time increment
  double T = 0.05;         // final time

  /// Throws std::invalid_argument if any constraint is violated.
  void validate() const;
};

/// The two prefactors through which L enters the scheme, computed for the
/// rescaled coupling L~ = L / m_bulk.
struct CouplingWeights {
  double w_inf = 1.0;   // L~/(L~+1)
  double w_zero = 0.0;  // 1/(L~+1)
  double L_eff = 0.0;   // L~ (unused when infinite)
  bool infinite = true;

  static CouplingWeights from(const ModelParams& params);
};

}  // namespace chdbc
