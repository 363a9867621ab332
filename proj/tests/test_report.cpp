#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "qbs/oracle.hpp"
#include "qbs/report.hpp"

using namespace qbs;
using namespace qbs::report;

namespace {

SimOutput run(double eps, std::int64_t paths, std::int64_t steps, std::uint64_t seed = 1) {
  ModelConfig c;
  c.eps_transform = eps;
  c.n_paths = paths;
  c.n_steps = steps;
  c.seed = seed;
  return simulate(c);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path fresh_dir(const char* name) {
  const auto d = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("step_scatter preserves path identity and needs two steps") {
  const auto sim = run(0.0, 500, 2);
  const auto s = step_scatter(sim);
  REQUIRE(s.size() == 500);
  CHECK(s[17].path_id == 17);
  CHECK(s[17].r1 == sim.ensemble.returns[0][17]);
  CHECK(s[17].r2 == sim.ensemble.returns[1][17]);
  CHECK_THROWS(step_scatter(run(0.0, 10, 1)));
}

TEST_CASE("eps = 0: no dependence between step magnitudes, flat profile") {
  const auto s = step_scatter(run(0.0, 100000, 2));
  CHECK(std::abs(abs_return_correlation(s)) < 3.0 / std::sqrt(100000.0));
  const auto prof = conditional_vol_profile(s, 10);
  double mean = 0.0;
  for (const auto& b : prof) mean += b.r2_std / 10.0;
  for (const auto& b : prof) CHECK(std::abs(b.r2_std - mean) < 3.0 * b.std_error * 1.1);
  CHECK(std::abs(fear_statistic(prof).z_low) < 3.0);
}

TEST_CASE("eps = 0.02: elevated second-step volatility after a large fall") {
  const auto prof = conditional_vol_profile(step_scatter(run(0.02, 100000, 2)), 10);
  const auto f = fear_statistic(prof);
  CHECK(f.low_std > f.mid_std);
  CHECK(f.high_std - f.mid_std < f.low_std - f.mid_std);
}

TEST_CASE("conditional profile bins are equal-count and ordered") {
  const auto s = step_scatter(run(0.0, 1003, 2));
  const auto prof = conditional_vol_profile(s, 7);
  std::int64_t total = 0;
  for (std::size_t b = 0; b < prof.size(); ++b) {
    total += prof[b].count;
    CHECK((prof[b].count == 143 || prof[b].count == 144));
    CHECK(prof[b].r1_lo <= prof[b].r1_hi);
    if (b > 0) CHECK(prof[b - 1].r1_hi <= prof[b].r1_lo);
    CHECK(prof[b].std_error == doctest::Approx(prof[b].r2_std / std::sqrt(2.0 * prof[b].count)));
  }
  CHECK(total == 1003);
  CHECK(conditional_vol_profile(s, 7).size() == 7);
  CHECK_THROWS(conditional_vol_profile(s, 2));
  CHECK_THROWS(conditional_vol_profile({}, 10));
}

TEST_CASE("final distribution: standard errors and the eps = 0 log law") {
  const auto sim = run(0.0, 100000, 50);
  const auto d = final_distribution(sim);
  CHECK(d.n_used == 100000);
  CHECK(d.n_excluded == 0);
  CHECK(d.skewness.std_error == doctest::Approx(std::sqrt(6.0 / 100000.0)));
  CHECK(d.excess_kurtosis.std_error == doctest::Approx(std::sqrt(24.0 / 100000.0)));
  // The Euler scheme's exact log-variance (quadrature) is the reference here;
  // the continuous-time value 0.5 differs by the O(c dt) discretization bias.
  const auto q = oracle::euler_log_cumulants(1.0, 0.01, 1.0, 50);
  CHECK(std::abs(d.variance.value - q.variance) < 3.0 * d.variance.std_error);
  CHECK(std::abs(d.mean.value - q.mean) < 3.0 * d.mean.std_error);
  CHECK(std::abs(d.skewness.value - q.skewness) < 3.0 * d.skewness.std_error);
  std::int64_t total = 0;
  for (auto c : d.histogram.counts) total += c;
  CHECK(total == d.n_used);
  CHECK(d.histogram.counts.size() == 500);
}

TEST_CASE("final distribution excludes non-positive paths up to 1%") {
  auto sim = run(0.0, 1000, 1);
  for (int i = 0; i < 10; ++i) sim.ensemble.states[static_cast<std::size_t>(i)].x = -0.1;
  const auto d = final_distribution(sim);
  CHECK(d.n_excluded == 10);
  CHECK(d.n_used == 990);
  sim.ensemble.states[10].x = 0.0;
  CHECK_THROWS_AS(final_distribution(sim), std::domain_error);
}

TEST_CASE("emit writes deterministic, well-formed files") {
  const auto sim = run(0.02, 5000, 3);
  const auto a = fresh_dir("qbs_report_a");
  const auto b = fresh_dir("qbs_report_b");
  emit(sim, a);
  emit(sim, b);
  emit(sim, b);  // rerun into the same directory
  for (const char* f : {"scatter.csv", "profile.csv", "hist.csv", "summary.json", "manifest.json"}) {
    INFO(f);
    const auto text = slurp(a / f);
    CHECK_FALSE(text.empty());
    CHECK(text == slurp(b / f));
    CHECK(text.back() == '\n');
  }
  CHECK(slurp(a / "scatter.csv").rfind("path_id,r1,r2\n", 0) == 0);
  CHECK(slurp(a / "profile.csv").rfind("bin_lo,bin_hi,count,r2_std,stderr\n", 0) == 0);

  std::istringstream hist(slurp(a / "hist.csv"));
  std::string line;
  std::getline(hist, line);
  CHECK(line == "bucket_left,bucket_right,count,probability");
  double psum = 0.0;
  while (std::getline(hist, line)) psum += std::stod(line.substr(line.rfind(',') + 1));
  CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));

  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["log_price"]["skewness"]["std_error"].get<double>() ==
        doctest::Approx(std::sqrt(6.0 / 5000.0)));
  CHECK(summary["config"]["eps_transform"] == "0.02");
  CHECK(summary["kernel"]["mean"].get<double>() == doctest::Approx(0.02 / 3));
  CHECK(nlohmann::json::parse(summary.dump()) == summary);

  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["config_hash"] == config_hash(sim.config));
  CHECK(manifest["seed"] == 1);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("emit surfaces I/O failures with the path") {
  const auto sim = run(0.0, 100, 2);
  const auto file = fresh_dir("qbs_report_blocker");
  std::ofstream(file) << "x";
  try {
    emit(sim, file / "sub");
    FAIL("expected an I/O error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("qbs_report_blocker") != std::string::npos);
  }
  std::filesystem::remove(file);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("config hash depends on every config field") {
  ModelConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}
