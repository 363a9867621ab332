#include "qbs/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "qbs/histogram.hpp"

namespace qbs::report {

using nlohmann::ordered_json;

std::vector<ScatterRecord> step_scatter(const SimOutput& sim) {
  const auto& ret = sim.ensemble.returns;
  if (ret.size() < 2) throw std::invalid_argument("step scatter needs a run of at least 2 steps");
  std::vector<ScatterRecord> out(ret[0].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {static_cast<std::int64_t>(i), ret[0][i], ret[1][i]};
  }
  return out;
}

double abs_return_correlation(std::span<const ScatterRecord> scatter) {
  if (scatter.size() < 2) throw std::invalid_argument("correlation needs at least 2 records");
  const double n = static_cast<double>(scatter.size());
  double ma = 0.0, mb = 0.0;
  for (const auto& s : scatter) {
    ma += std::abs(s.r1);
    mb += std::abs(s.r2);
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (const auto& s : scatter) {
    const double a = std::abs(s.r1) - ma;
    const double b = std::abs(s.r2) - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<ProfileBin> conditional_vol_profile(std::span<const ScatterRecord> scatter,
                                                int n_bins) {
  if (scatter.empty()) throw std::invalid_argument("conditional profile of an empty scatter");
  if (n_bins < 3) throw std::invalid_argument("conditional profile needs at least 3 bins");
  const auto n = static_cast<std::int64_t>(scatter.size());
  if (n < 2 * n_bins) throw std::invalid_argument("too few records for the requested bins");

  std::vector<ScatterRecord> sorted(scatter.begin(), scatter.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScatterRecord& a, const ScatterRecord& b) {
    return a.r1 != b.r1 ? a.r1 < b.r1 : a.path_id < b.path_id;
  });

  std::vector<ProfileBin> out;
  out.reserve(static_cast<std::size_t>(n_bins));
  for (int b = 0; b < n_bins; ++b) {
    const auto first = static_cast<std::size_t>(n * b / n_bins);
    const auto last = static_cast<std::size_t>(n * (b + 1) / n_bins);
    const double count = static_cast<double>(last - first);
    double mean = 0.0;
    for (std::size_t i = first; i < last; ++i) mean += sorted[i].r2;
    mean /= count;
    double ss = 0.0;
    for (std::size_t i = first; i < last; ++i) ss += (sorted[i].r2 - mean) * (sorted[i].r2 - mean);
    ProfileBin bin;
    bin.r1_lo = sorted[first].r1;
    bin.r1_hi = sorted[last - 1].r1;
    bin.count = static_cast<std::int64_t>(last - first);
    bin.r2_std = std::sqrt(ss / (count - 1.0));
    bin.std_error = bin.r2_std / std::sqrt(2.0 * count);
    out.push_back(bin);
  }
  return out;
}

FearStatistic fear_statistic(std::span<const ProfileBin> profile) {
  if (profile.size() < 3) throw std::invalid_argument("fear statistic needs at least 3 bins");
  const ProfileBin& lo = profile.front();
  const ProfileBin& mid = profile[profile.size() / 2];
  const ProfileBin& hi = profile.back();
  auto z = [&](const ProfileBin& a) {
    return (a.r2_std - mid.r2_std) / std::hypot(a.std_error, mid.std_error);
  };
  return {lo.r2_std, mid.r2_std, hi.r2_std, z(lo), z(hi)};
}

DistributionSummary final_distribution(const SimOutput& sim) {
  const auto& states = sim.ensemble.states;
  if (states.empty()) throw std::invalid_argument("final distribution of an empty ensemble");
  std::vector<double> logs;
  logs.reserve(states.size());
  DistributionSummary out;
  for (const auto& s : states) {
    if (s.x > 0.0) {
      logs.push_back(std::log(s.x));
    } else {
      ++out.n_excluded;
    }
  }
  if (static_cast<double>(out.n_excluded) > 0.01 * static_cast<double>(states.size())) {
    throw std::domain_error(std::to_string(out.n_excluded) +
                            " paths ended at or below zero (more than 1%)");
  }
  if (logs.size() < 2) throw std::domain_error("too few positive terminal prices");
  out.n_used = static_cast<std::int64_t>(logs.size());
  const double n = static_cast<double>(logs.size());

  const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : logs) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.mean = {mean, std::sqrt(m2 / n)};
  out.variance = {m2 * n / (n - 1.0), std::sqrt(std::max(m4 - m2 * m2, 0.0) / n)};
  out.skewness = {m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0, std::sqrt(6.0 / n)};
  out.excess_kurtosis = {m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0, std::sqrt(24.0 / n)};

  const auto [mn, mx] = std::minmax_element(logs.begin(), logs.end());
  const BucketAxis axis = BucketAxis::covering(*mn, *mx, sim.config.buckets_per_dim());
  out.histogram.lo = axis.lo;
  out.histogram.width = axis.width;
  out.histogram.counts.assign(static_cast<std::size_t>(axis.n), 0);
  for (double v : logs) ++out.histogram.counts[static_cast<std::size_t>(axis.bucket_of(v))];
  out.histogram.total = out.n_used;
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string config_hash(const ModelConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : format_config(config)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path,
                          std::ios::openmode mode = std::ios::out | std::ios::trunc) {
  std::ofstream out(path, mode | std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                             ec.message());
  }
}

ordered_json kernel_json(const Kernel& kernel) {
  ordered_json j;
  if (const auto* k1 = std::get_if<BlurKernel1D>(&kernel)) {
    j["type"] = "gaussian_1d";
    j["mean"] = k1->mean;
    j["variance"] = k1->variance;
    j["dirac"] = k1->is_dirac();
  } else {
    const auto& k2 = std::get<BlurKernel2D>(kernel);
    j["type"] = "gaussian_2d_product";
    j["variance_x"] = k2.variance_x_poly().to_string();
    j["variance_spread"] = k2.variance_spread_poly().to_string();
    j["dirac"] = k2.is_dirac();
  }
  return j;
}

ordered_json config_json(const ModelConfig& config) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : config_entries(config)) j[k] = v;
  return j;
}

ordered_json estimate_json(const Estimate& e) {
  return ordered_json{{"value", e.value}, {"std_error", e.std_error}};
}

void write_json(const ordered_json& j, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  close_output(out, path);
}

}  // namespace

void write_manifest(const ModelConfig& config, const Kernel& kernel,
                    const std::filesystem::path& out_dir, const std::string& status) {
  ensure_dir(out_dir);
  ordered_json j;
  j["tool"] = "qbs";
  j["version"] = kToolVersion;
  j["status"] = status;
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  j["config"] = config_json(config);
  j["kernel"] = kernel_json(kernel);
  write_json(j, out_dir / "manifest.json");
}

void write_manifest(const SimOutput& sim, const std::filesystem::path& out_dir,
                    const std::string& status) {
  write_manifest(sim.config, sim.kernel, out_dir, status);
}

void append_run_log(const std::filesystem::path& out_dir, const std::string& event) {
  ensure_dir(out_dir);
  const auto path = out_dir / "run.log";
  auto out = open_output(path, std::ios::out | std::ios::app);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  out << event << ' ' << stamp << '\n';
  close_output(out, path);
}

void emit(const SimOutput& sim, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const DistributionSummary dist = final_distribution(sim);

  ordered_json summary;
  summary["run_id"] = config_hash(sim.config).substr(0, 12);
  summary["n_used"] = dist.n_used;
  summary["n_excluded"] = dist.n_excluded;
  summary["log_price"] = {{"mean", estimate_json(dist.mean)},
                          {"variance", estimate_json(dist.variance)},
                          {"skewness", estimate_json(dist.skewness)},
                          {"excess_kurtosis", estimate_json(dist.excess_kurtosis)}};
  summary["histogram"] = {{"lo", dist.histogram.lo},
                          {"width", dist.histogram.width},
                          {"buckets", dist.histogram.counts.size()}};

  if (sim.ensemble.returns.size() >= 2) {
    const auto scatter = step_scatter(sim);
    {
      const auto path = out_dir / "scatter.csv";
      auto out = open_output(path);
      out << "path_id,r1,r2\n";
      for (const auto& s : scatter) {
        out << s.path_id << ',' << format_double(s.r1) << ',' << format_double(s.r2) << '\n';
      }
      close_output(out, path);
    }
    if (scatter.size() >= 20) {
      const auto profile = conditional_vol_profile(scatter, 10);
      const auto path = out_dir / "profile.csv";
      auto out = open_output(path);
      out << "bin_lo,bin_hi,count,r2_std,stderr\n";
      for (const auto& b : profile) {
        out << format_double(b.r1_lo) << ',' << format_double(b.r1_hi) << ',' << b.count << ','
            << format_double(b.r2_std) << ',' << format_double(b.std_error) << '\n';
      }
      close_output(out, path);
      const FearStatistic fear = fear_statistic(profile);
      summary["fear"] = {{"low_std", fear.low_std},
                         {"mid_std", fear.mid_std},
                         {"high_std", fear.high_std},
                         {"z_low", fear.z_low},
                         {"z_high", fear.z_high}};
      summary["abs_return_correlation"] = abs_return_correlation(scatter);
    }
  }

  {
    const auto path = out_dir / "hist.csv";
    auto out = open_output(path);
    out << "bucket_left,bucket_right,count,probability\n";
    const auto& h = dist.histogram;
    const double inv = 1.0 / static_cast<double>(h.total);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      const double left = h.lo + static_cast<double>(b) * h.width;
      out << format_double(left) << ',' << format_double(left + h.width) << ',' << h.counts[b]
          << ',' << format_double(static_cast<double>(h.counts[b]) * inv) << '\n';
    }
    close_output(out, path);
  }

  summary["config"] = config_json(sim.config);
  summary["kernel"] = kernel_json(sim.kernel);
  write_json(summary, out_dir / "summary.json");
  write_manifest(sim, out_dir, "complete");
}

}  // namespace qbs::report
