#include "qbs/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qbs/moments.hpp"
#include "qbs/rng.hpp"

namespace qbs {

namespace {

// Buckets further than this many kernel standard deviations contribute < 1e-18.
constexpr double kWindowSigmas = 9.0;

struct Window {
  std::int64_t first = 0;
  std::int64_t last = -1;  // inclusive; empty when last < first
};

Window kernel_window(const BucketAxis& axis, double center, double variance) {
  const double half = variance > 0.0 ? kWindowSigmas * std::sqrt(variance) : 0.0;
  const double lo = center - half;
  const double hi = center + half;
  if (hi < axis.lo || lo >= axis.hi()) return {};
  return {axis.bucket_of(lo), axis.bucket_of(hi)};
}

double finalize_factor(double convolved, double own_density, double floor) {
  const double f = convolved / std::max(own_density, floor);
  return std::clamp(f, 0.0, kMaxScalingFactor);
}

}  // namespace

ParticleEnsemble ParticleEnsemble::at_start(const ModelConfig& config) {
  ParticleEnsemble e;
  e.states.assign(static_cast<std::size_t>(config.n_paths),
                  PathState{config.x0, config.is_rotation() ? config.spread_start() : 0.0});
  return e;
}

Kernel fit_kernel(const ModelConfig& config) {
  if (!config.is_rotation()) {
    return fit_translation_kernel(config.eps_transform, config.blur_mean_sign);
  }
  const auto mx = solve_rotation_moments(MomentVariable::X, config.eps_transform, 4);
  const auto ms = solve_rotation_moments(MomentVariable::Spread, config.eps_transform, 4);
  return fit_rotation_kernel(mx, ms);
}

bool is_dirac(const Kernel& kernel) noexcept {
  return std::visit([](const auto& k) { return k.is_dirac(); }, kernel);
}

double density_floor(const HistogramGrid& hist, double density_floor_mult) noexcept {
  return density_floor_mult / static_cast<double>(hist.total) / hist.cell_volume();
}

double scaling_factor(const PathState& state, const HistogramGrid& hist,
                      const BlurKernel1D& kernel, double floor) {
  const BucketAxis& ax = hist.x_axis;
  const double center = state.x + kernel.mean;
  const Window w = kernel_window(ax, center, kernel.variance);
  double mass = 0.0;
  for (std::int64_t b = w.first; b <= w.last; ++b) {
    const double p = hist.probability[static_cast<std::size_t>(b)];
    if (p == 0.0) continue;
    mass += p * interval_mass(center, kernel.variance, ax.edge(b), ax.edge(b + 1));
  }
  return finalize_factor(mass / ax.width, hist.density_at(state), floor);
}

double scaling_factor(const PathState& state, const HistogramGrid& hist,
                      const BlurKernel2D& kernel, double floor) {
  const BucketAxis& ax = hist.x_axis;
  const BucketAxis& as = hist.spread_axis;
  const double vx = kernel.variance_x(state.x, state.spread);
  const double vs = kernel.variance_spread(state.x, state.spread);
  const Window wx = kernel_window(ax, state.x, vx);
  const Window ws = kernel_window(as, state.spread, vs);
  std::vector<double> spread_mass;
  spread_mass.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, ws.last - ws.first + 1)));
  for (std::int64_t bs = ws.first; bs <= ws.last; ++bs) {
    spread_mass.push_back(interval_mass(state.spread, vs, as.edge(bs), as.edge(bs + 1)));
  }
  double mass = 0.0;
  for (std::int64_t bx = wx.first; bx <= wx.last; ++bx) {
    const double mx = interval_mass(state.x, vx, ax.edge(bx), ax.edge(bx + 1));
    if (mx == 0.0) continue;
    double row = 0.0;
    for (std::int64_t bs = ws.first; bs <= ws.last; ++bs) {
      row += hist.probability[static_cast<std::size_t>(hist.index(bx, bs))] *
             spread_mass[static_cast<std::size_t>(bs - ws.first)];
    }
    mass += mx * row;
  }
  return finalize_factor(mass / hist.cell_volume(), hist.density_at(state), floor);
}

void compute_factors(std::span<const PathState> states, const HistogramGrid& hist,
                     const Kernel& kernel, double floor, std::span<double> out) {
  if (out.size() != states.size()) throw std::invalid_argument("factor buffer size mismatch");
  std::visit(
      [&](const auto& k) {
        for (std::size_t i = 0; i < states.size(); ++i) {
          out[i] = scaling_factor(states[i], hist, k, floor);
        }
      },
      kernel);
}

void compute_factors_parallel(std::span<const PathState> states, const HistogramGrid& hist,
                              const Kernel& kernel, double floor, std::span<double> out,
                              int threads) {
  if (out.size() != states.size()) throw std::invalid_argument("factor buffer size mismatch");
  const auto n = static_cast<std::int64_t>(states.size());
  std::visit(
      [&](const auto& k) {
#ifdef QBS_HAVE_OPENMP
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1024)
#endif
        for (std::int64_t i = 0; i < n; ++i) {
          out[i] = scaling_factor(states[i], hist, k, floor);
        }
      },
      kernel);
  (void)threads;
}

namespace {

inline void advance_one(PathState& s, double factor, const CoefficientFunctions& coeffs,
                        bool rotation, double dt, std::uint64_t seed, std::uint64_t path,
                        std::uint64_t step, double& ret) {
  const NormalPair z = normal_pair(seed, path, step);
  const double x = s.x;
  const double e = s.spread;
  s.x = x + std::sqrt(factor * coeffs.g1(x, e) * dt) * z.z1;
  if (rotation) s.spread = e + std::sqrt(factor * coeffs.g2(x, e) * dt) * z.z2;
  ret = (s.x - x) / x;
}

void check_advance_sizes(std::span<PathState> states, std::span<const double> factors,
                         std::span<double> returns) {
  if (factors.size() != states.size() || returns.size() != states.size()) {
    throw std::invalid_argument("advance buffers must match the ensemble size");
  }
}

}  // namespace

void advance(std::span<PathState> states, std::span<const double> factors,
             const CoefficientFunctions& coeffs, const ModelConfig& config, std::int64_t step,
             std::span<double> returns) {
  check_advance_sizes(states, factors, returns);
  const bool rotation = config.is_rotation();
  for (std::size_t i = 0; i < states.size(); ++i) {
    advance_one(states[i], factors[i], coeffs, rotation, config.dt, config.seed, i,
                static_cast<std::uint64_t>(step), returns[i]);
  }
}

void advance_parallel(std::span<PathState> states, std::span<const double> factors,
                      const CoefficientFunctions& coeffs, const ModelConfig& config,
                      std::int64_t step, std::span<double> returns, int threads) {
  check_advance_sizes(states, factors, returns);
  const bool rotation = config.is_rotation();
  const auto n = static_cast<std::int64_t>(states.size());
#ifdef QBS_HAVE_OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    advance_one(states[i], factors[i], coeffs, rotation, config.dt, config.seed,
                static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(step), returns[i]);
  }
  (void)threads;
}

StepRecord step(ParticleEnsemble& ensemble, const HistogramGrid* hist, const Kernel& kernel,
                const CoefficientFunctions& coeffs, const ModelConfig& config,
                const ExecOptions& exec) {
  const std::size_t n = ensemble.size();
  StepRecord rec;
  rec.step_index = ensemble.step_index + 1;
  rec.factors.assign(n, 1.0);
  rec.bootstrap = hist == nullptr || is_dirac(kernel);
  const bool parallel = exec.threads > 1;
  if (!rec.bootstrap) {
    const double floor = density_floor(*hist, config.density_floor_mult);
    if (parallel) {
      compute_factors_parallel(ensemble.states, *hist, kernel, floor, rec.factors, exec.threads);
    } else {
      compute_factors(ensemble.states, *hist, kernel, floor, rec.factors);
    }
  }
  std::vector<double> returns(n);
  if (parallel) {
    advance_parallel(ensemble.states, rec.factors, coeffs, config, rec.step_index, returns,
                     exec.threads);
  } else {
    advance(ensemble.states, rec.factors, coeffs, config, rec.step_index, returns);
  }
  ensemble.returns.push_back(std::move(returns));
  ensemble.step_index = rec.step_index;
  return rec;
}

SimOutput simulate(const ModelConfig& config, const ExecOptions& exec) {
  config.validate();
  if (exec.threads < 1) throw std::invalid_argument("thread count must be >= 1");
  SimOutput out{config, fit_kernel(config), ParticleEnsemble::at_start(config), {}};
  const auto coeffs = eval_coefficients(config);
  const bool classical = is_dirac(out.kernel);
  const int dims = config.is_rotation() ? 2 : 1;
  out.records.reserve(static_cast<std::size_t>(config.n_steps));
  for (std::int64_t k = 1; k <= config.n_steps; ++k) {
    if (classical || k == 1) {
      out.records.push_back(step(out.ensemble, nullptr, out.kernel, coeffs, config, exec));
      continue;
    }
    const auto hist =
        exec.threads > 1
            ? build_histogram_parallel(out.ensemble.states, config.buckets_per_dim(), dims,
                                       exec.threads)
            : build_histogram(out.ensemble.states, config.buckets_per_dim(), dims);
    out.records.push_back(step(out.ensemble, &hist, out.kernel, coeffs, config, exec));
  }
  return out;
}

BlurKernel1D effective_blur(const BlurKernel1D& kernel) noexcept {
  return {-kernel.mean, kernel.variance};
}

}  // namespace qbs
