#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbs/blur.hpp"
#include "qbs/config.hpp"
#include "qbs/engine.hpp"
#include "qbs/ensemble.hpp"

namespace qbs::oracle {

/// Zero-drift geometric diffusion dX = sqrt(c) X dW started at x0:
/// ln X_t ~ N(ln x0 - c t / 2, c t).
struct LognormalDensity {
  double mu = 0.0;
  double sigma = 1.0;

  double pdf(double x) const noexcept;
  double cdf(double x) const noexcept;
  double mean() const noexcept;
};

LognormalDensity classical_density(double x0, double c, double t);

/// Direct classical Euler engine, x += sqrt(g(x) dt) Z, on the same counter-based
/// normal stream as the particle engine. Independent of the engine code path.
ParticleEnsemble classical_euler(const ModelConfig& config);

/// Exact moments of ln x_T for the classical arithmetic Euler scheme
/// x_{k+1} = x_k (1 + sqrt(c dt) Z): the log-increments ln(1 + sqrt(c dt) Z) are
/// i.i.d., so their cumulants (computed by quadrature) add over the steps.
/// Requires sqrt(c dt) <= 0.125 so that 1 + sqrt(c dt) Z > 0 over the quadrature
/// range |Z| <= 8 (the mass outside is below 1e-15).
struct LogCumulants {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
};
LogCumulants euler_log_cumulants(double x0, double c, double dt, std::int64_t steps);

/// Cell-centred density on a uniform grid.
struct DensityGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> values;
  double dt_pde = 0.0;
  std::int64_t time_steps = 0;
  double mass_drift = 0.0;        // |mass(t_final) - mass(t_start)|
  double negative_mass = 0.0;     // integral of min(p, 0) at t_final

  std::size_t cells() const noexcept { return values.size(); }
  double width() const noexcept { return (hi - lo) / static_cast<double>(values.size()); }
  double left(std::size_t i) const noexcept { return lo + static_cast<double>(i) * width(); }
  double center(std::size_t i) const noexcept { return left(i) + 0.5 * width(); }
  double mass() const noexcept;
};

/// Coefficients of  dp/dt = sum_{k=2..K} c_k d^k(g p)/dx^k.
struct KramersMoyalTerms {
  std::array<double, 5> c{};  // index = derivative order; c[2..4] used
  double f_scale = 0.0;       // |f| driving the higher-order stability bound

  /// c_k = (-1)^k f^(k-2) / k!  (translation model with constant f).
  static KramersMoyalTerms from_f(double f);
  /// c_k = (1/2) (-1)^k H_{k-2} / (k-2)!  from the kernel's raw moments H_j.
  static KramersMoyalTerms from_kernel(const BlurKernel1D& kernel);
};

struct FpProblem {
  double g_coeff = 0.01;   // g(x) = g_coeff * x^2
  KramersMoyalTerms terms = KramersMoyalTerms::from_f(0.0);
  int truncation = 2;      // K in {2, 3, 4}
  double lo = 0.0;
  double hi = 2.0;
  std::int64_t cells = 1000;
  double t_start = 0.0;
  double t_final = 1.0;
  double init_center = 1.0;
  double init_width = 0.0;  // Gaussian start; 0 selects 2 grid cells
};

class StabilityError : public std::runtime_error {
public:
  StabilityError(const std::string& what, double dt_pde)
      : std::runtime_error(what), dt_pde_(dt_pde) {}
  double dt_pde() const noexcept { return dt_pde_; }

private:
  double dt_pde_;
};

/// Largest explicit time step: 0.25 dx^2 / max g, and for K >= 3 additionally
/// 0.25 dx^4 / (max g * f^2).
double stable_time_step(const FpProblem& problem);

/// Explicit flux-form central differences for the truncated nonlocal
/// Fokker-Planck equation. Zero flux at both grid ends, so mass is conserved to
/// rounding. Throws std::invalid_argument for K outside {2,3,4} and
/// StabilityError when |p| exceeds 10x its initial maximum or the solution
/// develops more than 1% negative mass.
DensityGrid solve_truncated_fp(const FpProblem& problem);

/// Lognormal cell averages on the given grid geometry.
DensityGrid lognormal_on_grid(const LognormalDensity& d, double lo, double hi, std::int64_t cells);

/// Histogram density of samples on the grid, normalized by the sample count.
DensityGrid empirical_density(std::span<const double> samples, double lo, double hi,
                              std::int64_t cells);

struct DensityComparison {
  double l1 = 0.0;
  double ks = 0.0;
};

/// L1 distance and Kolmogorov-Smirnov statistic between the two densities after
/// normalizing each to unit mass. Grids that differ are compared on the union of
/// their cell edges (piecewise-constant resampling). Throws when the grids do
/// not overlap.
DensityComparison compare_densities(const DensityGrid& a, const DensityGrid& b);

/// Exact one-sample KS statistic sup |F_N - F|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

struct GaussianTestDensity {
  double mean = 1.0;
  double stddev = 0.1;
};

/// Sup-norm difference over [mean - 6 sd, mean + 6 sd] between
///   (1/2) d2/dx2 (H * (g p))          by direct numerical convolution, and
///   (1/2) sum_{j=0}^{K-2} (-1)^j H_j / j! d^{j+2}(g p)/dx^{j+2}
/// for a Gaussian test density p and g = g_coeff x^2.
double kramers_moyal_residual(const GaussianTestDensity& density, const BlurKernel1D& kernel,
                              double g_coeff, int truncation);

enum class Reference { Auto, Lognormal, Particles };

struct OracleRequest {
  int truncation = 2;
  std::optional<std::int64_t> cells;
  std::optional<double> t_final;      // default n_steps * dt
  Reference reference = Reference::Auto;  // Auto: lognormal at eps = 0, particles otherwise
  ExecOptions exec;
};

struct OracleRun {
  FpProblem problem;
  DensityGrid pde;
  DensityGrid reference;
  const char* reference_name = "";
  DensityComparison comparison;
};

/// Truncated Fokker-Planck solve for a translation config, compared against
/// either the lognormal closed form (PDE from a narrow Gaussian at t = 0) or a
/// particle run. In the particle case the PDE starts at t = dt from the exact
/// post-bootstrap Gaussian N(x0, g(x0) dt) and uses the moments of the kernel
/// as the engine applies it. Without an explicit cell count, K >= 3 grids use
/// dx of about 1.2 |f| (the fourth-order term is anti-diffusive below that).
OracleRun run_oracle(const ModelConfig& config, const OracleRequest& request);

}  // namespace qbs::oracle
