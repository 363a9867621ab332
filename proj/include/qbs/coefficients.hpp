#pragma once

#include "qbs/config.hpp"

namespace qbs {

/// Diffusion coefficients g1, g2 and transformation coefficients f1, f2 of the
/// generalized (nonlocal) Black-Scholes operator. The diffusion family is c*x^2
/// for the price and c*spread^2 for the half bid-offer spread.
///
/// Translation: f1 = eps (constant), g2 = f2 = 0.
/// Rotation (small angle): f1 = eps*spread - (eps^2/2)*x, f2 = -eps*x - (eps^2/2)*spread.
class CoefficientFunctions {
public:
  CoefficientFunctions(ModelKind kind, double eps, double g1_coeff, double g2_coeff);

  double g1(double x, double spread) const;
  double g2(double x, double spread) const;
  double f1(double x, double spread) const noexcept;
  double f2(double x, double spread) const noexcept;

  ModelKind kind() const noexcept { return kind_; }
  double eps() const noexcept { return eps_; }
  double g1_coeff() const noexcept { return g1_coeff_; }
  double g2_coeff() const noexcept { return g2_coeff_; }

private:
  ModelKind kind_;
  double eps_;
  double g1_coeff_;
  double g2_coeff_;
};

/// Pure function of the configuration; rejects negative diffusion coefficients.
CoefficientFunctions eval_coefficients(const ModelConfig& config);

}  // namespace qbs
