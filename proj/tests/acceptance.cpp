// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// nonzero when any criterion fails. Tolerances and time budgets are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "qbs/blur.hpp"
#include "qbs/cli.hpp"
#include "qbs/engine.hpp"
#include "qbs/moments.hpp"
#include "qbs/oracle.hpp"
#include "qbs/report.hpp"

namespace {

using namespace qbs;

// Pinned tolerances.
constexpr double kMomentRelTol = 4e-16;       // criterion 1: a couple of ulps at most
constexpr double kPdeLognormalL1 = 0.01;      // criterion 4a
constexpr double kParticleLognormalKs = 0.015;  // criterion 4b
constexpr double kParticlePdeL1 = 0.05;       // criterion 4c
constexpr double kFearSigmas = 5.0;           // criterion 5, eps > 0
constexpr double kNullFearSigmas = 3.0;       // criterion 5, eps = 0
constexpr double kSkewSigmas = 3.0;           // criterion 6
constexpr double kMartingaleSigmas = 4.0;     // criterion 7
constexpr double kOrderLo = 2.5;              // criterion 8: leading dropped term is eps^3
constexpr double kOrderHi = 3.5;

constexpr std::int64_t kPaths = 100000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("[%s] %d %s: %s; %.2f s (budget %.0f s%s)\n", ok ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), secs, budget_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

std::string f(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

ModelConfig translation(double eps, std::int64_t steps, std::int64_t paths = kPaths) {
  ModelConfig c;
  c.eps_transform = eps;
  c.n_steps = steps;
  c.n_paths = paths;
  c.seed = 1;
  return c;
}

bool close_rel(double got, double want) {
  if (want == 0.0) return got == 0.0;
  return std::abs(got - want) <= kMomentRelTol * std::abs(want);
}

Outcome moment_exactness() {
  double worst = 0.0;
  bool ok = true;
  std::string bad;
  for (double eps : {0.0, 0.01, 0.02, 0.1}) {
    const double h[3] = {1.0, -eps / 3.0, eps * eps / 6.0};
    for (int i = 0; i < 3; ++i) {
      const double got = translation_moment(i, eps);
      if (h[i] != 0.0) worst = std::max(worst, std::abs(got - h[i]) / std::abs(h[i]));
      if (!close_rel(got, h[i])) {
        ok = false;
        bad += " H" + std::to_string(i) + "@" + f("%g", eps);
      }
    }
    // Fitted variance against the exact rational eps^2/18, rounded once.
    const Rational e = to_rational(eps);
    const double exact = Rational(e * e / 18).get_d();
    for (auto sign : {BlurMeanSign::SectionFourFour, BlurMeanSign::PropositionLiteral}) {
      const BlurKernel1D k = fit_translation_kernel(eps, sign);
      if (k.variance != exact) {
        ok = false;
        bad += " var@" + f("%g", eps);
      }
    }
  }
  return {ok, "H0..H2 worst rel err " + f("%.2e", worst) + " (tol " + f("%.0e", kMomentRelTol) +
                  "), variance == eps^2/18 exactly for 4 eps" + (ok ? "" : ";" + bad)};
}

Outcome rotation_recursion() {
  int checked = 0;
  int nonzero = 0;
  for (double eps : {0.0, 0.02, 0.1, 0.5}) {
    for (auto v : {MomentVariable::X, MomentVariable::Spread}) {
      const auto set = solve_rotation_moments(v, eps, 4);
      for (const auto& r : verify_recursion(set)) {
        ++checked;
        if (!r.is_zero()) ++nonzero;
      }
    }
  }
  return {checked == 24 && nonzero == 0,
          std::to_string(checked) + " exact residuals (orders 2-4, x and spread, 4 eps), " +
              std::to_string(nonzero) + " nonzero"};
}

Outcome classical_equivalence() {
  const ModelConfig c = translation(0.0, 50, 10000);
  const SimOutput sim = simulate(c);
  const ParticleEnsemble direct = oracle::classical_euler(c);
  const SimOutput sim8 = simulate(c, ExecOptions{8});
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < direct.size(); ++i) {
    if (sim.ensemble.states[i].x != direct.states[i].x) ++mismatched;
  }
  const bool returns_equal = sim.ensemble.returns == direct.returns;
  const bool threads_equal = sim8.ensemble == direct;
  return {mismatched == 0 && returns_equal && threads_equal,
          "N=10000, 50 steps: " + std::to_string(mismatched) +
              " terminal mismatches vs direct Euler, returns " +
              (returns_equal ? "identical" : "differ") + ", 8-thread run " +
              (threads_equal ? "identical" : "differs")};
}

Outcome oracle_chain() {
  // (a) K=2 PDE vs closed form at t = 1 on 1000 cells.
  ModelConfig ca = translation(0.0, 1);
  oracle::OracleRequest ra;
  ra.truncation = 2;
  ra.cells = 1000;
  ra.t_final = 1.0;
  ra.reference = oracle::Reference::Lognormal;
  const auto a = oracle::run_oracle(ca, ra);

  // (b) classical particle run, N = 100K, 50 steps, vs lognormal CDF at t = 50.
  const ModelConfig cb = translation(0.0, 50);
  const SimOutput sb = simulate(cb);
  std::vector<double> xs;
  for (const auto& s : sb.ensemble.states) xs.push_back(s.x);
  const auto ln = oracle::classical_density(cb.x0, cb.g1_coeff, 50.0 * cb.dt);
  const double ks = oracle::ks_statistic(xs, [&](double x) { return ln.cdf(x); });

  // (c) eps = 0.02, 2 steps, particles vs K = 4 PDE.
  oracle::OracleRequest rc;
  rc.truncation = 4;
  rc.reference = oracle::Reference::Particles;
  const auto c = oracle::run_oracle(translation(0.02, 2), rc);

  const bool ok = a.comparison.l1 <= kPdeLognormalL1 && ks <= kParticleLognormalKs &&
                  c.comparison.l1 <= kParticlePdeL1;
  return {ok, "(a) L1 " + f("%.5f", a.comparison.l1) + " <= " + f("%g", kPdeLognormalL1) +
                  "; (b) KS " + f("%.5f", ks) + " <= " + f("%g", kParticleLognormalKs) +
                  "; (c) L1 " + f("%.5f", c.comparison.l1) + " <= " + f("%g", kParticlePdeL1) +
                  " (" + std::to_string(c.problem.cells) + " cells)"};
}

Outcome fear_factor() {
  const auto run_fear = [](double eps) {
    const SimOutput sim = simulate(translation(eps, 2));
    const auto scatter = report::step_scatter(sim);
    return report::fear_statistic(report::conditional_vol_profile(scatter, 10));
  };
  const auto blurred = run_fear(0.02);
  const auto classical = run_fear(0.0);
  const bool ok = blurred.z_low >= kFearSigmas && std::abs(classical.z_low) <= kNullFearSigmas;
  return {ok, "eps=0.02 lowest vs middle decile r2 std " + f("%.5f", blurred.low_std) + " vs " +
                  f("%.5f", blurred.mid_std) + " = " + f("%.2f", blurred.z_low) + " SE (>= " +
                  f("%g", kFearSigmas) + "); eps=0 " + f("%.2f", classical.z_low) + " SE (|.| <= " +
                  f("%g", kNullFearSigmas) + ")"};
}

struct FiftyStep {
  report::DistributionSummary dist;
  double mean_x = 0.0;
  double se_x = 0.0;
};

FiftyStep fifty_step(double eps) {
  const SimOutput sim = simulate(translation(eps, 50));
  FiftyStep out;
  out.dist = report::final_distribution(sim);
  const double n = static_cast<double>(sim.ensemble.size());
  for (const auto& s : sim.ensemble.states) out.mean_x += s.x;
  out.mean_x /= n;
  double ss = 0.0;
  for (const auto& s : sim.ensemble.states) ss += (s.x - out.mean_x) * (s.x - out.mean_x);
  out.se_x = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

Outcome skewness_emergence() {
  const auto blurred = fifty_step(0.02);
  const auto classical = fifty_step(0.0);
  const double bound = kSkewSigmas * std::sqrt(6.0 / static_cast<double>(kPaths));
  const double sb = blurred.dist.skewness.value;
  const double sc = classical.dist.skewness.value;
  // Independent quadrature value of the eps = 0 skewness under arithmetic Euler.
  const auto euler = oracle::euler_log_cumulants(1.0, 0.01, 1.0, 50);
  const bool emerged = std::abs(sb) > bound;
  const bool null_ok = std::abs(sc) <= bound;
  return {emerged && null_ok, "eps=0.02 skew(ln x_T) " + f("%.4f", sb) + " (|.| > " +
                                  f("%.4f", bound) + ": " + (emerged ? "ok" : "no") +
                                  "); eps=0 skew " + f("%.4f", sc) + " (|.| <= " +
                                  f("%.4f", bound) + ": " + (null_ok ? "ok" : "no") +
                                  "; arithmetic-Euler quadrature predicts " +
                                  f("%.4f", euler.skewness) + ")"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome martingale_and_determinism() {
  std::string detail;
  bool ok = true;
  for (double eps : {0.0, 0.02}) {
    const auto r = fifty_step(eps);
    const double z = (r.mean_x - 1.0) / r.se_x;
    ok = ok && std::abs(z) <= kMartingaleSigmas;
    detail += "eps=" + f("%g", eps) + " E[x_T]-x0 = " + f("%.2f", z) + " SE; ";
  }

  const auto base = std::filesystem::temp_directory_path() / "qbs_acceptance";
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);
  const auto cfg = base / "run.cfg";
  std::ofstream(cfg) << "eps_transform = 0.02\nn_paths = 100000\nn_steps = 50\nseed = 1\n";
  std::ostringstream sink;
  for (int threads : {1, 8}) {
    cli::SimulateOptions o;
    o.config_path = cfg;
    o.threads = threads;
    o.out_dir = base / ("t" + std::to_string(threads));
    if (cli::cmd_simulate(o, sink, sink) != 0) throw std::runtime_error(sink.str());
  }
  int differing = 0;
  for (const char* name : {"scatter.csv", "profile.csv", "hist.csv", "summary.json",
                           "manifest.json"}) {
    const auto a = slurp(base / "t1" / name);
    if (a.empty() || a != slurp(base / "t8" / name)) ++differing;
  }
  std::filesystem::remove_all(base);
  ok = ok && differing == 0;
  detail += "(tol " + f("%g", kMartingaleSigmas) + " SE); --threads 1 vs 8: " +
            std::to_string(differing) + " of 5 files differ";
  return {ok, detail};
}

Outcome kramers_moyal_consistency() {
  const oracle::GaussianTestDensity p{1.0, 0.1};
  const double c = 0.01;
  const auto kernel_at = [](double eps) {
    return effective_blur(fit_translation_kernel(eps, BlurMeanSign::SectionFourFour));
  };
  const double r3 = oracle::kramers_moyal_residual(p, kernel_at(0.02), c, 3);
  const double r4 = oracle::kramers_moyal_residual(p, kernel_at(0.02), c, 4);
  const double r4h = oracle::kramers_moyal_residual(p, kernel_at(0.01), c, 4);
  const double order = std::log2(r4 / r4h);
  const bool ok = r4 < r3 && r4h < r4 && order >= kOrderLo && order <= kOrderHi;
  return {ok, "residual K=3 " + f("%.3e", r3) + ", K=4 " + f("%.3e", r4) + ", K=4 at eps/2 " +
                  f("%.3e", r4h) + "; empirical order " + f("%.2f", order) + " in [" +
                  f("%g", kOrderLo) + ", " + f("%g", kOrderHi) + "]"};
}

}  // namespace

int main() {
  run(1, "moment exactness", 1, moment_exactness);
  run(2, "rotation recursion", 1, rotation_recursion);
  run(3, "classical-limit equivalence", 10, classical_equivalence);
  run(4, "oracle chain", 120, oracle_chain);
  run(5, "fear factor", 60, fear_factor);
  run(6, "skewness emergence", 300, skewness_emergence);
  run(7, "martingale and determinism", 300, martingale_and_determinism);
  run(8, "Kramers-Moyal consistency", 30, kramers_moyal_consistency);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
