#pragma once

#include <span>
#include <variant>
#include <vector>

#include "qbs/blur.hpp"
#include "qbs/coefficients.hpp"
#include "qbs/config.hpp"
#include "qbs/ensemble.hpp"
#include "qbs/histogram.hpp"

namespace qbs {

using Kernel = std::variant<BlurKernel1D, BlurKernel2D>;

/// Moments -> fitted Gaussian for the configured model (max moment order 4 in 2-D).
Kernel fit_kernel(const ModelConfig& config);
bool is_dirac(const Kernel& kernel) noexcept;

/// threads == 1 runs the serial reference kernels; threads > 1 the OpenMP kernels.
/// Both produce bit-identical output.
struct ExecOptions {
  int threads = 1;
};

inline constexpr double kMaxScalingFactor = 100.0;

/// Density floor density_floor_mult * (1/N) / cell_volume.
double density_floor(const HistogramGrid& hist, double density_floor_mult) noexcept;

/// Variance scaling factor (H * p)(x_i) / p(x_i) for one receiving path.
///
/// The histogram is read as a piecewise-constant density and the kernel is
/// integrated exactly over each bucket, with the kernel oriented as H(y - x_i):
/// the numerator is E[p_hat(x_i + Y)], Y ~ N(mean, variance). The denominator is
/// the histogram density at x_i floored at `floor`. Result clamped to [0, 100].
double scaling_factor(const PathState& state, const HistogramGrid& hist,
                      const BlurKernel1D& kernel, double floor);

/// 2-D variant: product of independent zero-mean Gaussians whose variances are
/// evaluated at the receiving path's (x, spread).
double scaling_factor(const PathState& state, const HistogramGrid& hist,
                      const BlurKernel2D& kernel, double floor);

/// Factors for every path (serial reference).
void compute_factors(std::span<const PathState> states, const HistogramGrid& hist,
                     const Kernel& kernel, double floor, std::span<double> out);
void compute_factors_parallel(std::span<const PathState> states, const HistogramGrid& hist,
                              const Kernel& kernel, double floor, std::span<double> out,
                              int threads);

/// Euler-Maruyama update with zero drift:
///   x += sqrt(factor * g1 * dt) * Z1,  spread += sqrt(factor * g2 * dt) * Z2 (2-D only),
/// with (Z1, Z2) drawn from the counter stream at (seed, path, step).
/// Writes proportional returns to `returns`.
void advance(std::span<PathState> states, std::span<const double> factors,
             const CoefficientFunctions& coeffs, const ModelConfig& config, std::int64_t step,
             std::span<double> returns);
void advance_parallel(std::span<PathState> states, std::span<const double> factors,
                      const CoefficientFunctions& coeffs, const ModelConfig& config,
                      std::int64_t step, std::span<double> returns, int threads);

/// One time step. `hist == nullptr` selects the bootstrap / classical branch
/// (factor identically 1). Appends the step's returns to the ensemble.
StepRecord step(ParticleEnsemble& ensemble, const HistogramGrid* hist, const Kernel& kernel,
                const CoefficientFunctions& coeffs, const ModelConfig& config,
                const ExecOptions& exec = {});

struct SimOutput {
  ModelConfig config;
  Kernel kernel;
  ParticleEnsemble ensemble;
  std::vector<StepRecord> records;
};

/// Full particle run: bootstrap first step, then histogram -> factors -> step
/// for the remaining steps. eps = 0 never builds a histogram.
SimOutput simulate(const ModelConfig& config, const ExecOptions& exec = {});

/// Kernel as it acts in the Fokker-Planck blurred form d2/dx2 (H * (g p)):
/// the engine integrates H(y - x), so the equivalent convolution kernel is the
/// reflection N(-mean, variance).
BlurKernel1D effective_blur(const BlurKernel1D& kernel) noexcept;

}  // namespace qbs
