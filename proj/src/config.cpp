#include "qbs/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qbs {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || !std::isfinite(out)) {
    throw ConfigError(std::string(key), "config key '" + std::string(key) +
                                            "': expected a real number, got '" +
                                            std::string(value) + "'");
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError(std::string(key), "config key '" + std::string(key) +
                                            "': expected an integer, got '" +
                                            std::string(value) + "'");
  }
  return out;
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, std::string("config key '") + key + "': " + message);
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::Translation1D ? "translation" : "rotation";
}

std::string_view to_string(BlurMeanSign sign) noexcept {
  return sign == BlurMeanSign::PropositionLiteral ? "proposition_literal" : "section_four_four";
}

ModelKind parse_model_kind(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "translation" || t == "translation1d") return ModelKind::Translation1D;
  if (t == "rotation" || t == "rotation2d") return ModelKind::Rotation2D;
  throw ConfigError("model_kind", "config key 'model_kind': unknown model '" +
                                      std::string(text) + "' (translation|rotation)");
}

BlurMeanSign parse_blur_mean_sign(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "proposition_literal" || t == "propositionliteral") {
    return BlurMeanSign::PropositionLiteral;
  }
  if (t == "section_four_four" || t == "sectionfourfour") return BlurMeanSign::SectionFourFour;
  throw ConfigError("blur_mean_sign",
                    "config key 'blur_mean_sign': unknown mode '" + std::string(text) +
                        "' (proposition_literal|section_four_four)");
}

void apply_config_entry(ModelConfig& c, std::string_view raw_key, std::string_view raw_value) {
  const auto key = trim(raw_key);
  const auto value = trim(raw_value);
  if (value.empty()) {
    throw ConfigError(std::string(key), "config key '" + std::string(key) + "': empty value");
  }
  if (key == "model_kind") {
    c.model_kind = parse_model_kind(value);
  } else if (key == "eps_transform") {
    c.eps_transform = parse_real(key, value);
  } else if (key == "g1_coeff") {
    c.g1_coeff = parse_real(key, value);
  } else if (key == "g2_coeff") {
    c.g2_coeff = parse_real(key, value);
  } else if (key == "x0") {
    c.x0 = parse_real(key, value);
  } else if (key == "spread0") {
    c.spread0 = parse_real(key, value);
  } else if (key == "n_paths") {
    c.n_paths = parse_int<std::int64_t>(key, value);
  } else if (key == "n_buckets") {
    c.n_buckets = parse_int<std::int64_t>(key, value);
  } else if (key == "n_steps") {
    c.n_steps = parse_int<std::int64_t>(key, value);
  } else if (key == "dt") {
    c.dt = parse_real(key, value);
  } else if (key == "seed") {
    c.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "blur_mean_sign") {
    c.blur_mean_sign = parse_blur_mean_sign(value);
  } else if (key == "density_floor_mult") {
    c.density_floor_mult = parse_real(key, value);
  } else {
    throw ConfigError(std::string(key), "unknown config key '" + std::string(key) + "'");
  }
}

void ModelConfig::validate() const {
  require(eps_transform >= 0.0, "eps_transform", "must be >= 0");
  require(g1_coeff >= 0.0, "g1_coeff", "must be >= 0");
  require(x0 > 0.0, "x0", "must be > 0");
  require(n_paths > 0, "n_paths", "must be positive");
  require(n_buckets >= 0, "n_buckets", "must be positive");
  require(buckets_per_dim() >= 2, "n_buckets", "must be at least 2");
  require(n_steps > 0, "n_steps", "must be positive");
  require(dt > 0.0, "dt", "must be > 0");
  require(density_floor_mult > 0.0, "density_floor_mult", "must be > 0");
  if (is_rotation()) {
    require(g2_coeff.has_value(), "g2_coeff", "required for the rotation model");
    require(spread0.has_value(), "spread0", "required for the rotation model");
    require(*g2_coeff >= 0.0, "g2_coeff", "must be >= 0");
    require(*spread0 >= 0.0, "spread0", "must be >= 0");
    require(eps_transform * eps_transform < 2.0, "eps_transform",
            "rotation moments need eps^2 < 2");
  }
}

ModelConfig parse_config(std::string_view text) {
  ModelConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", "config line " + std::to_string(line_no) +
                                ": expected key=value, got '" + std::string(view) + "'");
    }
    apply_config_entry(c, view.substr(0, eq), view.substr(eq + 1));
  }
  return c;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::map<std::string, std::string> config_entries(const ModelConfig& c) {
  std::map<std::string, std::string> out;
  out["model_kind"] = std::string(to_string(c.model_kind));
  out["eps_transform"] = format_real(c.eps_transform);
  out["g1_coeff"] = format_real(c.g1_coeff);
  if (c.g2_coeff) out["g2_coeff"] = format_real(*c.g2_coeff);
  out["x0"] = format_real(c.x0);
  if (c.spread0) out["spread0"] = format_real(*c.spread0);
  out["n_paths"] = std::to_string(c.n_paths);
  out["n_buckets"] = std::to_string(c.buckets_per_dim());
  out["n_steps"] = std::to_string(c.n_steps);
  out["dt"] = format_real(c.dt);
  out["seed"] = std::to_string(c.seed);
  out["blur_mean_sign"] = std::string(to_string(c.blur_mean_sign));
  out["density_floor_mult"] = format_real(c.density_floor_mult);
  return out;
}

std::string format_config(const ModelConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + "=" + v + "\n";
  return out;
}

}  // namespace qbs
