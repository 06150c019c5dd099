#include <cmath>
#include <stdexcept>

#include "gpp/analytics.hpp"

namespace gpp {

namespace {

constexpr double kBoundaryTolerance = 1e-12;

bool at_boundary(double ratio, double boundary) {
  return std::abs(ratio - boundary) <= kBoundaryTolerance * boundary;
}

}  // namespace

Regime classify_regime(double gamma_over_rho) {
  if (!(std::isfinite(gamma_over_rho) && gamma_over_rho > 0.0))
    throw std::invalid_argument("gamma/rho must be finite and > 0");
  if (at_boundary(gamma_over_rho, 0.5)) return Regime::BrownianNonGaussian;
  if (at_boundary(gamma_over_rho, 1.0)) return Regime::Ballistic;
  if (gamma_over_rho < 0.5) return Regime::Subdiffusion;
  if (gamma_over_rho < 1.0) return Regime::Superdiffusion;
  return Regime::Hyperballistic;
}

Regime classify_regime(const ModelParams& params) { return classify_regime(params.hurst()); }

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::Subdiffusion: return "subdiffusion";
    case Regime::BrownianNonGaussian: return "brownian_non_gaussian";
    case Regime::Superdiffusion: return "superdiffusion";
    case Regime::Ballistic: return "ballistic";
    case Regime::Hyperballistic: return "hyperballistic";
  }
  return "unknown";
}

}  // namespace gpp
