#pragma once

#include "qbs/config.hpp"
#include "qbs/moments.hpp"

namespace qbs {

/// Gaussian blurring kernel N(mean, variance). variance == 0 is the Dirac kernel.
struct BlurKernel1D {
  double mean = 0.0;
  double variance = 0.0;

  bool is_dirac() const noexcept { return variance == 0.0; }
  double stddev() const noexcept;

  /// Raw moment E[Y^k] of the fitted Gaussian, k = 0..4.
  double raw_moment(int k) const;

  friend bool operator==(const BlurKernel1D&, const BlurKernel1D&) = default;
};

/// Product of two independent zero-mean Gaussians whose variances are the
/// order-2 rotation moments evaluated at the receiving path's location.
class BlurKernel2D {
public:
  BlurKernel2D(MomentPolynomial variance_x, MomentPolynomial variance_spread, double eps);

  /// Variances clamped at zero (the zero-constant moment solution is nonnegative
  /// in exact arithmetic; clamping only absorbs double rounding).
  double variance_x(double x, double spread) const noexcept;
  double variance_spread(double x, double spread) const noexcept;

  const MomentPolynomial& variance_x_poly() const noexcept { return vx_; }
  const MomentPolynomial& variance_spread_poly() const noexcept { return vs_; }
  double eps() const noexcept { return eps_; }
  bool is_dirac() const noexcept { return vx_.is_zero() && vs_.is_zero(); }

private:
  MomentPolynomial vx_;
  MomentPolynomial vs_;
  FastPolynomial vx_fast_;
  FastPolynomial vs_fast_;
  double eps_;
};

/// variance = H2 - H1^2 = eps^2/18 (rounded once from the exact rational);
/// mean = -eps/3 (PropositionLiteral) or +eps/3 (SectionFourFour).
BlurKernel1D fit_translation_kernel(double eps, BlurMeanSign sign);

/// Uses the order-2 polynomials of both moment sets; rejects mismatched eps or
/// sets solved below order 2.
BlurKernel2D fit_rotation_kernel(const MomentSet& moments_x, const MomentSet& moments_spread);

/// Gaussian pdf of the kernel at y. Throws std::domain_error for the Dirac kernel.
double kernel_density(const BlurKernel1D& kernel, double y);

/// P(lo <= Y <= hi) for Y ~ N(mean, variance), evaluated with complementary
/// error functions on the side that avoids cancellation. The Dirac kernel
/// returns the indicator of mean in [lo, hi).
double interval_mass(double mean, double variance, double lo, double hi) noexcept;

}  // namespace qbs
