#include "chdbc/params.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace chdbc {

Coupling Coupling::finite(double value) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw std::invalid_argument("coupling L must be a finite nonnegative number or inf");
  return Coupling(value, false);
}

double Coupling::value() const {
  if (infinite_) throw std::logic_error("Coupling::value() called on infinite coupling");
  return value_;
}

std::string Coupling::to_string() const {
  if (infinite_) return "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value_);
  return std::string(buf, res.ptr);
}

Coupling Coupling::parse(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "Inf" || text == "INF") return infinite();
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("cannot parse coupling L from '" + text + "'");
  return finite(v);
}

void ModelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be positive and finite");
  };
  positive(epsilon, "epsilon");
  positive(delta, "delta");
  positive(m_bulk, "m_bulk");
  positive(m_surf, "m_surf");
  positive(beta, "beta");
  positive(tau, "tau");
  positive(T, "T");
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("kappa must be nonnegative and finite");
  if (tau > T) throw std::invalid_argument("tau must not exceed T");
}

CouplingWeights CouplingWeights::from(const ModelParams& params) {
  CouplingWeights w;
  if (params.coupling.is_infinite()) return w;
  w.infinite = false;
  w.L_eff = params.coupling.value() / params.m_bulk;
  w.w_inf = w.L_eff / (w.L_eff + 1.0);
  w.w_zero = 1.0 / (w.L_eff + 1.0);
  return w;
}

}  // namespace chdbc
