#include "qbs/blur.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbs {

double BlurKernel1D::stddev() const noexcept { return std::sqrt(variance); }

double BlurKernel1D::raw_moment(int k) const {
  const double m = mean;
  const double v = variance;
  switch (k) {
    case 0: return 1.0;
    case 1: return m;
    case 2: return m * m + v;
    case 3: return m * m * m + 3.0 * m * v;
    case 4: return m * m * m * m + 6.0 * m * m * v + 3.0 * v * v;
    default: throw std::invalid_argument("raw_moment supports orders 0..4");
  }
}

BlurKernel2D::BlurKernel2D(MomentPolynomial variance_x, MomentPolynomial variance_spread,
                           double eps)
    : vx_(std::move(variance_x)),
      vs_(std::move(variance_spread)),
      vx_fast_(vx_),
      vs_fast_(vs_),
      eps_(eps) {}

double BlurKernel2D::variance_x(double x, double spread) const noexcept {
  return std::max(0.0, vx_fast_(x, spread));
}

double BlurKernel2D::variance_spread(double x, double spread) const noexcept {
  return std::max(0.0, vs_fast_(x, spread));
}

BlurKernel1D fit_translation_kernel(double eps, BlurMeanSign sign) {
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
  if (eps == 0.0) return {};
  const Rational e = to_rational(eps);
  const Rational h1 = translation_moment_exact(1, e);
  const Rational h2 = translation_moment_exact(2, e);
  Rational var = h2 - h1 * h1;
  var.canonicalize();
  BlurKernel1D k;
  k.variance = var.get_d();
  k.mean = sign == BlurMeanSign::PropositionLiteral ? h1.get_d() : -h1.get_d();
  return k;
}

BlurKernel2D fit_rotation_kernel(const MomentSet& mx, const MomentSet& ms) {
  if (mx.eps_transform != ms.eps_transform) {
    throw std::invalid_argument("moment sets were solved for different eps");
  }
  if (mx.variable != MomentVariable::X || ms.variable != MomentVariable::Spread) {
    throw std::invalid_argument("expected one x moment set and one spread moment set");
  }
  if (mx.max_order < 2 || ms.max_order < 2 || mx.polys.size() < 3 || ms.polys.size() < 3) {
    throw std::invalid_argument("moment sets must be solved to order >= 2");
  }
  return BlurKernel2D(mx.polys[2], ms.polys[2], mx.eps_transform);
}

double kernel_density(const BlurKernel1D& kernel, double y) {
  if (kernel.is_dirac()) {
    throw std::domain_error("Dirac kernel has no pointwise density; use the classical path");
  }
  const double z = (y - kernel.mean) / kernel.stddev();
  return std::exp(-0.5 * z * z) / (kernel.stddev() * std::sqrt(2.0 * std::numbers::pi));
}

double interval_mass(double mean, double variance, double lo, double hi) noexcept {
  if (!(hi > lo)) return 0.0;
  if (variance <= 0.0) return (mean >= lo && mean < hi) ? 1.0 : 0.0;
  const double scale = 1.0 / (std::sqrt(variance) * std::numbers::sqrt2);
  const double a = (lo - mean) * scale;
  const double b = (hi - mean) * scale;
  if (a >= 0.0) return 0.5 * (std::erfc(a) - std::erfc(b));
  if (b <= 0.0) return 0.5 * (std::erfc(-b) - std::erfc(-a));
  return 1.0 - 0.5 * (std::erfc(-a) + std::erfc(b));
}

}  // namespace qbs
