#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qbs {

enum class ModelKind { Translation1D, Rotation2D };

/// Which sign the fitted translation kernel mean takes. The moment formula gives
/// H1 = -eps/3; the kernel used for the published experiments is N(+eps/3, eps^2/18).
enum class BlurMeanSign { PropositionLiteral, SectionFourFour };

/// Raised for malformed or inconsistent configuration. `key()` names the
/// offending entry (empty when the problem is not tied to a single key).
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Full description of one experiment.
struct ModelConfig {
  ModelKind model_kind = ModelKind::Translation1D;
  double eps_transform = 0.0;
  double g1_coeff = 0.01;
  std::optional<double> g2_coeff;  // rotation only
  double x0 = 1.0;
  std::optional<double> spread0;   // rotation only
  std::int64_t n_paths = 100000;
  std::int64_t n_buckets = 0;      // 0 = model default (500 in 1-D, 50 per axis in 2-D)
  std::int64_t n_steps = 2;
  double dt = 1.0;
  std::uint64_t seed = 1;
  BlurMeanSign blur_mean_sign = BlurMeanSign::SectionFourFour;
  double density_floor_mult = 1.0;

  bool is_rotation() const noexcept { return model_kind == ModelKind::Rotation2D; }
  bool is_classical() const noexcept { return eps_transform == 0.0; }

  /// Buckets per dimension after applying the model default.
  std::int64_t buckets_per_dim() const noexcept {
    if (n_buckets > 0) return n_buckets;
    return is_rotation() ? 50 : 500;
  }
  double g2() const noexcept { return g2_coeff.value_or(0.0); }
  double spread_start() const noexcept { return spread0.value_or(0.0); }

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string_view to_string(ModelKind kind) noexcept;
std::string_view to_string(BlurMeanSign sign) noexcept;
ModelKind parse_model_kind(std::string_view text);
BlurMeanSign parse_blur_mean_sign(std::string_view text);

/// Applies one `key=value` assignment. Unknown keys and unparsable values throw.
void apply_config_entry(ModelConfig& config, std::string_view key, std::string_view value);

/// Parses the flat key=value format (one entry per line, '#' starts a comment).
ModelConfig parse_config(std::string_view text);
ModelConfig load_config(const std::filesystem::path& path);

/// Canonical key=value rendering with model defaults resolved (n_buckets is
/// written as the effective per-dimension count).
std::string format_config(const ModelConfig& config);

/// Ordered key -> canonical value text, used for manifests.
std::map<std::string, std::string> config_entries(const ModelConfig& config);

}  // namespace qbs
