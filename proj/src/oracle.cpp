#include "qbs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qbs/coefficients.hpp"
#include "qbs/rng.hpp"

namespace qbs::oracle {

double LognormalDensity::pdf(double x) const noexcept {
  if (!(x > 0.0)) return 0.0;
  const double z = (std::log(x) - mu) / sigma;
  return std::exp(-0.5 * z * z) / (x * sigma * std::sqrt(2.0 * std::numbers::pi));
}

double LognormalDensity::cdf(double x) const noexcept {
  if (!(x > 0.0)) return 0.0;
  const double z = (std::log(x) - mu) / sigma;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double LognormalDensity::mean() const noexcept { return std::exp(mu + 0.5 * sigma * sigma); }

LognormalDensity classical_density(double x0, double c, double t) {
  if (!(x0 > 0.0)) throw std::invalid_argument("lognormal start must be positive");
  if (!(c > 0.0) || !(t > 0.0)) {
    throw std::invalid_argument("lognormal needs positive diffusion coefficient and time");
  }
  return {std::log(x0) - 0.5 * c * t, std::sqrt(c * t)};
}

ParticleEnsemble classical_euler(const ModelConfig& config) {
  config.validate();
  const CoefficientFunctions coeffs = eval_coefficients(config);
  const bool rotation = config.is_rotation();
  ParticleEnsemble e = ParticleEnsemble::at_start(config);
  e.returns.reserve(static_cast<std::size_t>(config.n_steps));
  for (std::int64_t k = 1; k <= config.n_steps; ++k) {
    std::vector<double> r(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      const NormalPair z = normal_pair(config.seed, i, static_cast<std::uint64_t>(k));
      PathState& s = e.states[i];
      const double x = s.x;
      const double sp = s.spread;
      s.x = x + std::sqrt(coeffs.g1(x, sp) * config.dt) * z.z1;
      if (rotation) s.spread = sp + std::sqrt(coeffs.g2(x, sp) * config.dt) * z.z2;
      r[i] = (s.x - x) / x;
    }
    e.returns.push_back(std::move(r));
    e.step_index = k;
  }
  return e;
}

LogCumulants euler_log_cumulants(double x0, double c, double dt, std::int64_t steps) {
  const double sigma = std::sqrt(c * dt);
  if (!(x0 > 0.0) || !(sigma > 0.0) || sigma > 0.125 || steps < 1) {
    throw std::invalid_argument("log cumulants need x0 > 0, 0 < sqrt(c dt) <= 0.125, steps >= 1");
  }
  // Composite Simpson on z in [-8, 8]; the integrand is smooth there.
  constexpr int kIntervals = 4000;
  const double h = 16.0 / kIntervals;
  double m[4] = {0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i <= kIntervals; ++i) {
    const double z = -8.0 + h * i;
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double y = std::log1p(sigma * z);
    double pw = 1.0;
    for (double& mk : m) {
      mk += w * phi * pw;
      pw *= y;
    }
  }
  for (double& mk : m) mk *= h / 3.0;
  const double mean = m[1] / m[0];
  const double var = m[2] / m[0] - mean * mean;
  const double k3 = m[3] / m[0] - 3.0 * mean * m[2] / m[0] + 2.0 * mean * mean * mean;
  const double n = static_cast<double>(steps);
  return {std::log(x0) + n * mean, n * var, n * k3 / std::pow(n * var, 1.5)};
}

double DensityGrid::mass() const noexcept {
  double m = 0.0;
  for (double v : values) m += v;
  return m * width();
}

KramersMoyalTerms KramersMoyalTerms::from_f(double f) {
  KramersMoyalTerms t;
  t.c[2] = 0.5;
  t.c[3] = -f / 6.0;
  t.c[4] = f * f / 24.0;
  t.f_scale = std::abs(f);
  return t;
}

KramersMoyalTerms KramersMoyalTerms::from_kernel(const BlurKernel1D& kernel) {
  KramersMoyalTerms t;
  t.c[2] = 0.5 * kernel.raw_moment(0);
  t.c[3] = -0.5 * kernel.raw_moment(1);
  t.c[4] = 0.25 * kernel.raw_moment(2);
  t.f_scale = std::max(6.0 * std::abs(t.c[3]), std::sqrt(24.0 * std::abs(t.c[4])));
  return t;
}

namespace {

void check_problem(const FpProblem& p) {
  if (p.truncation < 2 || p.truncation > 4) {
    throw std::invalid_argument("truncation order K must be 2, 3 or 4");
  }
  if (!(p.hi > p.lo)) throw std::invalid_argument("PDE grid needs hi > lo");
  if (p.cells < 8) throw std::invalid_argument("PDE grid needs at least 8 cells");
  if (!(p.g_coeff > 0.0)) throw std::invalid_argument("PDE needs a positive diffusion coefficient");
  if (!(p.t_final > p.t_start)) throw std::invalid_argument("PDE needs t_final > t_start");
  if (p.init_width < 0.0) throw std::invalid_argument("initial width must be nonnegative");
}

// Time derivative of the cell values in flux form. q = g p at cell centres with
// two ghost cells of zero on each side; boundary face fluxes are zero.
class FluxOperator {
public:
  FluxOperator(const FpProblem& p, double dx) : dx_(dx), k_(p.truncation), c_(p.terms.c) {
    g_.resize(static_cast<std::size_t>(p.cells));
    for (std::size_t i = 0; i < g_.size(); ++i) {
      const double x = p.lo + (static_cast<double>(i) + 0.5) * dx;
      g_[i] = p.g_coeff * x * x;
    }
    q_.assign(g_.size() + 4, 0.0);
    flux_.assign(g_.size() + 1, 0.0);
  }

  void apply(const std::vector<double>& p, std::vector<double>& out) {
    const std::size_t n = g_.size();
    for (std::size_t i = 0; i < n; ++i) q_[i + 2] = g_[i] * p[i];
    const double inv1 = 1.0 / dx_;
    const double inv2 = 1.0 / (2.0 * dx_ * dx_);
    const double inv3 = 1.0 / (dx_ * dx_ * dx_);
    // Face j sits between cells j-1 and j; cell m is stored at q_[m + 2].
    flux_[0] = 0.0;
    flux_[n] = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      const double qp = q_[j + 2], q0 = q_[j + 1], qm = q_[j];
      double f = c_[2] * (qp - q0) * inv1;
      if (k_ >= 3) {
        const double qpp = q_[j + 3];
        f += c_[3] * (qpp - qp - q0 + qm) * inv2;
        if (k_ >= 4) f += c_[4] * (qpp - 3.0 * qp + 3.0 * q0 - qm) * inv3;
      }
      flux_[j] = f;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = (flux_[i + 1] - flux_[i]) * inv1;
  }

private:
  double dx_;
  int k_;
  std::array<double, 5> c_;
  std::vector<double> g_;
  std::vector<double> q_;
  std::vector<double> flux_;
};

double negative_part(const std::vector<double>& p, double dx) {
  double neg = 0.0;
  for (double v : p) neg += std::min(v, 0.0);
  return neg * dx;
}

}  // namespace

double stable_time_step(const FpProblem& p) {
  check_problem(p);
  const double dx = (p.hi - p.lo) / static_cast<double>(p.cells);
  const double xmax = std::max(std::abs(p.lo), std::abs(p.hi));
  const double gmax = p.g_coeff * xmax * xmax;
  double dt = 0.25 * dx * dx / gmax;
  if (p.truncation >= 3 && p.terms.f_scale > 0.0) {
    dt = std::min(dt, 0.25 * dx * dx * dx * dx / (gmax * p.terms.f_scale * p.terms.f_scale));
  }
  return dt;
}

DensityGrid solve_truncated_fp(const FpProblem& problem) {
  const double dt_max = stable_time_step(problem);
  const double span = problem.t_final - problem.t_start;
  const auto steps = static_cast<std::int64_t>(std::ceil(span / dt_max));
  const double dt = span / static_cast<double>(steps);

  DensityGrid grid;
  grid.lo = problem.lo;
  grid.hi = problem.hi;
  grid.values.assign(static_cast<std::size_t>(problem.cells), 0.0);
  grid.dt_pde = dt;
  grid.time_steps = steps;
  const double dx = grid.width();

  const double width = problem.init_width > 0.0 ? problem.init_width : 2.0 * dx;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    grid.values[i] =
        interval_mass(problem.init_center, width * width, grid.left(i), grid.left(i) + dx) / dx;
  }
  const double m0 = grid.mass();
  if (!(m0 > 0.5)) throw std::invalid_argument("initial density lies mostly outside the PDE grid");
  for (double& v : grid.values) v /= m0;
  const double start_mass = grid.mass();
  double init_max = 0.0;
  for (double v : grid.values) init_max = std::max(init_max, v);

  // Three-stage strong-stability-preserving Runge-Kutta (Shu-Osher form).
  FluxOperator op(problem, dx);
  std::vector<double>& p = grid.values;
  const std::size_t n = p.size();
  std::vector<double> k(n), s1(n), s2(n);
  for (std::int64_t t = 0; t < steps; ++t) {
    op.apply(p, k);
    for (std::size_t i = 0; i < n; ++i) s1[i] = p[i] + dt * k[i];
    op.apply(s1, k);
    for (std::size_t i = 0; i < n; ++i) s2[i] = 0.75 * p[i] + 0.25 * (s1[i] + dt * k[i]);
    op.apply(s2, k);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = (p[i] + 2.0 * (s2[i] + dt * k[i])) / 3.0;
      peak = std::max(peak, std::abs(p[i]));
    }
    if (!std::isfinite(peak) || peak > 10.0 * init_max) {
      throw StabilityError("truncated Fokker-Planck solution blew up (dt_pde = " +
                               std::to_string(dt) + ")",
                           dt);
    }
    if (negative_part(p, dx) < -0.01) {
      throw StabilityError("truncated Fokker-Planck solution lost positivity (dt_pde = " +
                               std::to_string(dt) + ")",
                           dt);
    }
  }
  grid.mass_drift = std::abs(grid.mass() - start_mass);
  grid.negative_mass = negative_part(p, dx);
  return grid;
}

DensityGrid lognormal_on_grid(const LognormalDensity& d, double lo, double hi,
                              std::int64_t cells) {
  if (!(hi > lo) || cells < 1) throw std::invalid_argument("invalid grid geometry");
  DensityGrid g;
  g.lo = lo;
  g.hi = hi;
  g.values.resize(static_cast<std::size_t>(cells));
  const double dx = g.width();
  for (std::size_t i = 0; i < g.cells(); ++i) {
    g.values[i] = (d.cdf(g.left(i) + dx) - d.cdf(g.left(i))) / dx;
  }
  return g;
}

DensityGrid empirical_density(std::span<const double> samples, double lo, double hi,
                              std::int64_t cells) {
  if (!(hi > lo) || cells < 1) throw std::invalid_argument("invalid grid geometry");
  if (samples.empty()) throw std::invalid_argument("no samples to bin");
  DensityGrid g;
  g.lo = lo;
  g.hi = hi;
  g.values.assign(static_cast<std::size_t>(cells), 0.0);
  const double dx = g.width();
  for (double s : samples) {
    if (!(s >= lo) || !(s < hi)) continue;
    const auto b = std::min(static_cast<std::size_t>((s - lo) / dx), g.cells() - 1);
    g.values[b] += 1.0;
  }
  const double scale = 1.0 / (static_cast<double>(samples.size()) * dx);
  for (double& v : g.values) v *= scale;
  return g;
}

namespace {

double value_at(const DensityGrid& g, double x, double inv_mass) {
  if (x < g.lo || x >= g.hi) return 0.0;
  const auto b = std::min(static_cast<std::size_t>((x - g.lo) / g.width()), g.cells() - 1);
  return g.values[b] * inv_mass;
}

}  // namespace

DensityComparison compare_densities(const DensityGrid& a, const DensityGrid& b) {
  if (a.values.empty() || b.values.empty()) throw std::invalid_argument("empty density grid");
  if (a.hi <= b.lo || b.hi <= a.lo) throw std::invalid_argument("density grids do not overlap");
  const double ma = a.mass();
  const double mb = b.mass();
  if (!(ma > 0.0) || !(mb > 0.0)) throw std::invalid_argument("density grid has no mass");

  std::vector<double> edges;
  edges.reserve(a.cells() + b.cells() + 2);
  for (std::size_t i = 0; i <= a.cells(); ++i) edges.push_back(a.left(i));
  for (std::size_t i = 0; i <= b.cells(); ++i) edges.push_back(b.left(i));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  DensityComparison out;
  double cdf_a = 0.0;
  double cdf_b = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double len = edges[k + 1] - edges[k];
    if (!(len > 0.0)) continue;
    const double mid = 0.5 * (edges[k] + edges[k + 1]);
    const double pa = value_at(a, mid, 1.0 / ma);
    const double pb = value_at(b, mid, 1.0 / mb);
    out.l1 += std::abs(pa - pb) * len;
    cdf_a += pa * len;
    cdf_b += pb * len;
    out.ks = std::max(out.ks, std::abs(cdf_a - cdf_b));
  }
  return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("KS statistic needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

namespace {

// P(u) * phi(u) with phi the N(0, s^2) density; coefficients in powers of u.
struct PolyGauss {
  std::vector<double> coef;
  double s2;

  PolyGauss derivative() const {
    std::vector<double> out(coef.size() + 1, 0.0);
    for (std::size_t i = 1; i < coef.size(); ++i) out[i - 1] += static_cast<double>(i) * coef[i];
    for (std::size_t i = 0; i < coef.size(); ++i) out[i + 1] -= coef[i] / s2;
    return {std::move(out), s2};
  }

  double operator()(double u) const {
    double p = 0.0;
    for (std::size_t i = coef.size(); i-- > 0;) p = p * u + coef[i];
    return p * std::exp(-0.5 * u * u / s2) / std::sqrt(2.0 * std::numbers::pi * s2);
  }
};

}  // namespace

double kramers_moyal_residual(const GaussianTestDensity& density, const BlurKernel1D& kernel,
                              double g_coeff, int truncation) {
  if (truncation < 2 || truncation > 4) {
    throw std::invalid_argument("truncation order K must be 2, 3 or 4");
  }
  if (!(density.stddev > 0.0)) throw std::invalid_argument("test density needs stddev > 0");
  const double mu = density.mean;
  std::vector<PolyGauss> d;
  d.push_back({{g_coeff * mu * mu, 2.0 * g_coeff * mu, g_coeff}, density.stddev * density.stddev});
  for (int k = 1; k <= truncation; ++k) d.push_back(d.back().derivative());

  double factorial = 1.0;
  std::vector<double> series_w;
  for (int j = 0; j <= truncation - 2; ++j) {
    if (j > 0) factorial *= j;
    series_w.push_back(0.5 * ((j % 2) ? -1.0 : 1.0) * kernel.raw_moment(j) / factorial);
  }

  constexpr int kNodes = 1601;
  const double sd = kernel.is_dirac() ? 0.0 : kernel.stddev();
  const double y0 = kernel.mean - 12.0 * sd;
  const double hy = 24.0 * sd / (kNodes - 1);

  constexpr int kPoints = 401;
  double residual = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double u = -6.0 * density.stddev + 12.0 * density.stddev * i / (kPoints - 1);
    double conv;
    if (kernel.is_dirac()) {
      conv = d[2](u);
    } else {
      conv = 0.0;
      for (int m = 0; m < kNodes; ++m) {
        const double y = y0 + hy * m;
        const double w = (m == 0 || m == kNodes - 1) ? 0.5 : 1.0;
        conv += w * kernel_density(kernel, y) * d[2](u - y);
      }
      conv *= hy;
    }
    double series = 0.0;
    for (std::size_t j = 0; j < series_w.size(); ++j) series += series_w[j] * d[j + 2](u);
    residual = std::max(residual, std::abs(0.5 * conv - series));
  }
  return residual;
}

OracleRun run_oracle(const ModelConfig& config, const OracleRequest& request) {
  config.validate();
  if (request.truncation < 2 || request.truncation > 4) {
    throw std::invalid_argument("unsupported truncation order " +
                                std::to_string(request.truncation) + " (K must be 2, 3 or 4)");
  }
  if (config.is_rotation()) {
    throw std::invalid_argument("the PDE oracle covers the 1-D translation model only");
  }
  const auto kernel = std::get<BlurKernel1D>(fit_kernel(config));
  const bool particles = request.reference == Reference::Particles ||
                         (request.reference == Reference::Auto && !config.is_classical());
  const double horizon = static_cast<double>(config.n_steps) * config.dt;

  OracleRun run;
  FpProblem& p = run.problem;
  p.g_coeff = config.g1_coeff;
  p.terms = KramersMoyalTerms::from_kernel(effective_blur(kernel));
  p.truncation = request.truncation;
  p.init_center = config.x0;
  p.t_final = request.t_final.value_or(horizon);
  if (particles) {
    if (std::abs(p.t_final - horizon) > 1e-12 * horizon) {
      throw std::invalid_argument("particle comparison needs t_final = n_steps * dt");
    }
    if (config.n_steps < 2) throw std::invalid_argument("particle comparison needs >= 2 steps");
    p.t_start = config.dt;
    const double sd = config.x0 * std::sqrt(config.g1_coeff * p.t_final);
    p.lo = config.x0 - 7.0 * sd;
    p.hi = config.x0 + 7.0 * sd;
    p.init_width = config.x0 * std::sqrt(config.g1_coeff * config.dt);
  } else {
    const double s = std::sqrt(config.g1_coeff * p.t_final);
    p.lo = config.x0 * std::exp(-8.0 * s);
    p.hi = config.x0 * std::exp(8.0 * s);
  }
  if (request.cells) {
    p.cells = *request.cells;
  } else if (p.truncation >= 3 && p.terms.f_scale > 0.0) {
    const auto c = static_cast<std::int64_t>((p.hi - p.lo) / (1.2 * p.terms.f_scale));
    p.cells = std::clamp<std::int64_t>(c, 16, 1000);
  } else {
    p.cells = 1000;
  }

  run.pde = solve_truncated_fp(p);
  if (particles) {
    const SimOutput sim = simulate(config, request.exec);
    std::vector<double> xs;
    xs.reserve(sim.ensemble.size());
    for (const auto& s : sim.ensemble.states) xs.push_back(s.x);
    run.reference = empirical_density(xs, p.lo, p.hi, p.cells);
    run.reference_name = "particles";
  } else {
    run.reference = lognormal_on_grid(classical_density(config.x0, config.g1_coeff, p.t_final),
                                      p.lo, p.hi, p.cells);
    run.reference_name = "lognormal";
  }
  run.comparison = compare_densities(run.pde, run.reference);
  return run;
}

}  // namespace qbs::oracle
