#include "qbs/coefficients.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qbs {

CoefficientFunctions::CoefficientFunctions(ModelKind kind, double eps, double g1_coeff,
                                           double g2_coeff)
    : kind_(kind), eps_(eps), g1_coeff_(g1_coeff), g2_coeff_(g2_coeff) {
  if (!(g1_coeff >= 0.0)) throw std::invalid_argument("g1 coefficient must be >= 0");
  if (!(g2_coeff >= 0.0)) throw std::invalid_argument("g2 coefficient must be >= 0");
  if (kind == ModelKind::Translation1D) g2_coeff_ = 0.0;
}

double CoefficientFunctions::g1(double x, double /*spread*/) const {
  const double v = g1_coeff_ * x * x;
  if (v < 0.0 || std::isnan(v)) {
    throw std::domain_error("g1 evaluated negative at x=" + std::to_string(x));
  }
  return v;
}

double CoefficientFunctions::g2(double /*x*/, double spread) const {
  const double v = g2_coeff_ * spread * spread;
  if (v < 0.0 || std::isnan(v)) {
    throw std::domain_error("g2 evaluated negative at spread=" + std::to_string(spread));
  }
  return v;
}

double CoefficientFunctions::f1(double x, double spread) const noexcept {
  if (kind_ == ModelKind::Translation1D) return eps_;
  return eps_ * spread - (eps_ * eps_ / 2.0) * x;
}

double CoefficientFunctions::f2(double x, double spread) const noexcept {
  if (kind_ == ModelKind::Translation1D) return 0.0;
  return -eps_ * x - (eps_ * eps_ / 2.0) * spread;
}

CoefficientFunctions eval_coefficients(const ModelConfig& config) {
  if (config.g1_coeff < 0.0) throw ConfigError("g1_coeff", "g1_coeff must be >= 0");
  if (config.g2() < 0.0) throw ConfigError("g2_coeff", "g2_coeff must be >= 0");
  return CoefficientFunctions(config.model_kind, config.eps_transform, config.g1_coeff,
                              config.g2());
}

}  // namespace qbs
