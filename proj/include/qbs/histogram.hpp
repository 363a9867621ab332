#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qbs/ensemble.hpp"

namespace qbs {

/// One uniform bucket axis: bucket b covers [lo + b*width, lo + (b+1)*width).
struct BucketAxis {
  double lo = 0.0;
  double width = 1.0;
  std::int64_t n = 1;

  double edge(std::int64_t k) const noexcept { return lo + static_cast<double>(k) * width; }
  double center(std::int64_t b) const noexcept { return lo + (static_cast<double>(b) + 0.5) * width; }
  double hi() const noexcept { return edge(n); }
  /// Bucket containing v, clamped into [0, n).
  std::int64_t bucket_of(double v) const noexcept;

  /// Axis spanning [min - w, max + w], w = (max - min) / n. A degenerate range
  /// (max == min) gets a half-width of 1e-12 * |min| (1e-12 if min is 0).
  static BucketAxis covering(double min, double max, std::int64_t n);
};

/// 1-D or 2-D uniform bucket grid: the discrete probability law of the ensemble.
struct HistogramGrid {
  int dims = 1;
  BucketAxis x_axis;
  BucketAxis spread_axis;  // n == 1 in 1-D
  std::vector<std::int64_t> counts;
  std::vector<double> probability;
  std::int64_t total = 0;

  std::int64_t index(std::int64_t bx, std::int64_t bs) const noexcept {
    return bx * spread_axis.n + bs;
  }
  std::int64_t bucket_of(const PathState& s) const noexcept;
  double cell_volume() const noexcept;
  /// Histogram density estimate P(bucket(s)) / cell_volume.
  double density_at(const PathState& s) const noexcept;
};

/// Serial reference build.
HistogramGrid build_histogram(std::span<const PathState> states, std::int64_t n_buckets, int dims);

/// OpenMP build (parallel min/max and per-thread count reduction). Identical
/// output to build_histogram for any thread count.
HistogramGrid build_histogram_parallel(std::span<const PathState> states, std::int64_t n_buckets,
                                       int dims, int threads);

}  // namespace qbs
