#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qbs/engine.hpp"

namespace qbs::report {

inline constexpr const char* kToolVersion = "0.1.0";

struct ScatterRecord {
  std::int64_t path_id = 0;
  double r1 = 0.0;
  double r2 = 0.0;
};

/// (r1, r2) per path in path order. Throws if the run has fewer than 2 steps.
std::vector<ScatterRecord> step_scatter(const SimOutput& sim);

/// Sample correlation of (|r1|, |r2|).
double abs_return_correlation(std::span<const ScatterRecord> scatter);

struct ProfileBin {
  double r1_lo = 0.0;
  double r1_hi = 0.0;
  std::int64_t count = 0;
  double r2_std = 0.0;
  double std_error = 0.0;  // r2_std / sqrt(2 * count)
};

/// Equal-count bins over r1 (sorted by r1, ties broken by path id); bin b takes
/// records [b*N/n_bins, (b+1)*N/n_bins). Throws for n_bins < 3 or too few records.
std::vector<ProfileBin> conditional_vol_profile(std::span<const ScatterRecord> scatter,
                                                int n_bins);

/// Lowest, middle (index n_bins/2) and highest bins compared in units of the
/// pooled standard error sqrt(se_a^2 + se_b^2).
struct FearStatistic {
  double low_std = 0.0;
  double mid_std = 0.0;
  double high_std = 0.0;
  double z_low = 0.0;   // (low - mid) / pooled SE
  double z_high = 0.0;  // (high - mid) / pooled SE
};
FearStatistic fear_statistic(std::span<const ProfileBin> profile);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct LogHistogram {
  double lo = 0.0;
  double width = 0.0;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
};

/// Moments of ln(x_T) over paths with x_T > 0.
struct DistributionSummary {
  std::int64_t n_used = 0;
  std::int64_t n_excluded = 0;  // paths with x_T <= 0
  Estimate mean;
  Estimate variance;
  Estimate skewness;         // SE = sqrt(6/N)
  Estimate excess_kurtosis;  // SE = sqrt(24/N)
  LogHistogram histogram;
};

/// Throws std::domain_error when more than 1% of paths end at or below zero.
DistributionSummary final_distribution(const SimOutput& sim);

/// Full-precision decimal (17 significant digits).
std::string format_double(double v);

/// 16 hex digits of FNV-1a over the canonical config text.
std::string config_hash(const ModelConfig& config);

/// Writes manifest.json with the given status ("running" or "complete").
/// Contains only deterministic fields; wall-clock timestamps go to run.log.
void write_manifest(const SimOutput& sim, const std::filesystem::path& out_dir,
                    const std::string& status);
void write_manifest(const ModelConfig& config, const Kernel& kernel,
                    const std::filesystem::path& out_dir, const std::string& status);

/// Appends "<event> <UTC timestamp>" to run.log.
void append_run_log(const std::filesystem::path& out_dir, const std::string& event);

/// scatter.csv (runs with >= 2 steps), profile.csv (>= 2 steps), hist.csv,
/// summary.json and manifest.json (status "complete"). Throws std::runtime_error
/// naming the path on I/O failure.
void emit(const SimOutput& sim, const std::filesystem::path& out_dir);

}  // namespace qbs::report
