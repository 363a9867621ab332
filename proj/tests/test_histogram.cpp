#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qbs/histogram.hpp"
#include "qbs/oracle.hpp"
#include "qbs/rng.hpp"

using namespace qbs;

namespace {

std::vector<PathState> lognormal_sample(std::size_t n, double sigma) {
  std::vector<PathState> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = normal_pair(11, i, 1);
    out[i] = {std::exp(-0.5 * sigma * sigma + sigma * z.z1), 0.1 + 0.01 * z.z2};
  }
  return out;
}

}  // namespace

TEST_CASE("four paths in two buckets split evenly") {
  const std::vector<PathState> s{{1, 0}, {2, 0}, {3, 0}, {4, 0}};
  const auto h = build_histogram(s, 2, 1);
  REQUIRE(h.probability.size() == 2);
  CHECK(h.probability[0] == 0.5);
  CHECK(h.probability[1] == 0.5);
  CHECK(h.x_axis.lo < 1.0);
  CHECK(h.x_axis.hi() > 4.0);
}

TEST_CASE("counts sum to N and every path lands in its own bucket range") {
  const auto s = lognormal_sample(20000, 0.2);
  for (int dims : {1, 2}) {
    const auto h = build_histogram(s, dims == 1 ? 500 : 50, dims);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::int64_t{0}) == 20000);
    double p = 0.0;
    for (double v : h.probability) p += v;
    CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& st : s) {
      const auto b = h.x_axis.bucket_of(st.x);
      CHECK((st.x >= h.x_axis.edge(b) && st.x < h.x_axis.edge(b + 1)));
    }
  }
}

TEST_CASE("degenerate ensemble gets a tiny range around the point") {
  const std::vector<PathState> s(10, PathState{2.0, 0.0});
  const auto h = build_histogram(s, 500, 1);
  CHECK(h.x_axis.lo == doctest::Approx(2.0 - 2e-12));
  CHECK(h.x_axis.hi() == doctest::Approx(2.0 + 2e-12));
  int occupied = 0;
  for (auto c : h.counts) occupied += c > 0;
  CHECK(occupied == 1);
}

TEST_CASE("invalid histogram requests") {
  CHECK_THROWS(build_histogram({}, 10, 1));
  const std::vector<PathState> s{{1, 0}, {2, 0}};
  CHECK_THROWS(build_histogram(s, 1, 1));
  CHECK_THROWS(build_histogram(s, 10, 3));
}

TEST_CASE("parallel build is identical to the serial reference") {
  const auto s = lognormal_sample(50000, 0.3);
  for (int dims : {1, 2}) {
    const auto a = build_histogram(s, 100, dims);
    for (int t : {2, 3, 8}) {
      const auto b = build_histogram_parallel(s, 100, dims, t);
      CHECK(a.counts == b.counts);
      CHECK(a.probability == b.probability);
      CHECK(a.x_axis.lo == b.x_axis.lo);
      CHECK(a.x_axis.width == b.x_axis.width);
    }
  }
}

TEST_CASE("100K lognormal sample in 500 buckets matches the analytic law (chi-square)") {
  const double sigma = 0.1;
  const auto s = lognormal_sample(100000, sigma);
  const auto h = build_histogram(s, 500, 1);
  const auto ln = oracle::LognormalDensity{-0.5 * sigma * sigma, sigma};
  // Merge buckets into bins of expected count >= 50 before the chi-square sum.
  double chi2 = 0.0, obs = 0.0, expct = 0.0;
  int dof = 0;
  for (std::int64_t b = 0; b < h.x_axis.n; ++b) {
    obs += static_cast<double>(h.counts[static_cast<std::size_t>(b)]);
    expct += 100000.0 * (ln.cdf(h.x_axis.edge(b + 1)) - ln.cdf(h.x_axis.edge(b)));
    if (expct >= 50.0 || b == h.x_axis.n - 1) {
      chi2 += (obs - expct) * (obs - expct) / expct;
      ++dof;
      obs = expct = 0.0;
    }
  }
  // Mean dof, sd sqrt(2 dof): accept within 5 sd.
  CHECK(chi2 < dof + 5.0 * std::sqrt(2.0 * dof));
}
