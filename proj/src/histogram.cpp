#include "qbs/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef QBS_HAVE_OPENMP
#include <omp.h>
#endif

namespace qbs {

std::int64_t BucketAxis::bucket_of(double v) const noexcept {
  const double pos = std::floor((v - lo) / width);
  if (!(pos >= 0.0)) return 0;
  if (pos >= static_cast<double>(n)) return n - 1;
  return static_cast<std::int64_t>(pos);
}

BucketAxis BucketAxis::covering(double min, double max, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("bucket count must be positive");
  BucketAxis axis;
  axis.n = n;
  if (!(max > min)) {
    const double half = min == 0.0 ? 1e-12 : 1e-12 * std::abs(min);
    axis.lo = min - half;
    axis.width = 2.0 * half / static_cast<double>(n);
    return axis;
  }
  const double pad = (max - min) / static_cast<double>(n);
  axis.lo = min - pad;
  axis.width = ((max + pad) - axis.lo) / static_cast<double>(n);
  return axis;
}

std::int64_t HistogramGrid::bucket_of(const PathState& s) const noexcept {
  const auto bx = x_axis.bucket_of(s.x);
  const auto bs = dims == 2 ? spread_axis.bucket_of(s.spread) : 0;
  return index(bx, bs);
}

double HistogramGrid::cell_volume() const noexcept {
  return dims == 2 ? x_axis.width * spread_axis.width : x_axis.width;
}

double HistogramGrid::density_at(const PathState& s) const noexcept {
  return probability[static_cast<std::size_t>(bucket_of(s))] / cell_volume();
}

namespace {

struct Extent {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
  double s_min = std::numeric_limits<double>::infinity();
  double s_max = -std::numeric_limits<double>::infinity();
};

HistogramGrid make_grid(const Extent& e, std::int64_t n_buckets, int dims, std::int64_t total) {
  if (dims != 1 && dims != 2) throw std::invalid_argument("histogram dims must be 1 or 2");
  if (n_buckets < 2) throw std::invalid_argument("histogram needs at least 2 buckets");
  if (!std::isfinite(e.x_min) || !std::isfinite(e.x_max)) {
    throw std::domain_error("ensemble contains non-finite prices");
  }
  HistogramGrid grid;
  grid.dims = dims;
  grid.total = total;
  grid.x_axis = BucketAxis::covering(e.x_min, e.x_max, n_buckets);
  if (dims == 2) {
    if (!std::isfinite(e.s_min) || !std::isfinite(e.s_max)) {
      throw std::domain_error("ensemble contains non-finite spreads");
    }
    grid.spread_axis = BucketAxis::covering(e.s_min, e.s_max, n_buckets);
  } else {
    grid.spread_axis = BucketAxis{0.0, 1.0, 1};
  }
  grid.counts.assign(static_cast<std::size_t>(grid.x_axis.n * grid.spread_axis.n), 0);
  return grid;
}

void finish(HistogramGrid& grid) {
  grid.probability.resize(grid.counts.size());
  const double inv = 1.0 / static_cast<double>(grid.total);
  for (std::size_t b = 0; b < grid.counts.size(); ++b) {
    grid.probability[b] = static_cast<double>(grid.counts[b]) * inv;
  }
}

}  // namespace

HistogramGrid build_histogram(std::span<const PathState> states, std::int64_t n_buckets, int dims) {
  if (states.empty()) throw std::invalid_argument("cannot bucket an empty ensemble");
  Extent e;
  for (const auto& s : states) {
    e.x_min = std::min(e.x_min, s.x);
    e.x_max = std::max(e.x_max, s.x);
    e.s_min = std::min(e.s_min, s.spread);
    e.s_max = std::max(e.s_max, s.spread);
  }
  auto grid = make_grid(e, n_buckets, dims, static_cast<std::int64_t>(states.size()));
  for (const auto& s : states) ++grid.counts[static_cast<std::size_t>(grid.bucket_of(s))];
  finish(grid);
  return grid;
}

HistogramGrid build_histogram_parallel(std::span<const PathState> states, std::int64_t n_buckets,
                                       int dims, int threads) {
#ifndef QBS_HAVE_OPENMP
  (void)threads;
  return build_histogram(states, n_buckets, dims);
#else
  if (states.empty()) throw std::invalid_argument("cannot bucket an empty ensemble");
  const auto n = static_cast<std::int64_t>(states.size());
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double s_min = x_min;
  double s_max = -x_min;
#pragma omp parallel for num_threads(threads) schedule(static) \
    reduction(min : x_min, s_min) reduction(max : x_max, s_max)
  for (std::int64_t i = 0; i < n; ++i) {
    x_min = std::min(x_min, states[i].x);
    x_max = std::max(x_max, states[i].x);
    s_min = std::min(s_min, states[i].spread);
    s_max = std::max(s_max, states[i].spread);
  }
  auto grid = make_grid(Extent{x_min, x_max, s_min, s_max}, n_buckets, dims, n);
  const std::size_t cells = grid.counts.size();
#pragma omp parallel num_threads(threads)
  {
    std::vector<std::int64_t> local(cells, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) ++local[static_cast<std::size_t>(grid.bucket_of(states[i]))];
#pragma omp critical(qbs_histogram_merge)
    for (std::size_t b = 0; b < cells; ++b) grid.counts[b] += local[b];
  }
  finish(grid);
  return grid;
#endif
}

}  // namespace qbs
