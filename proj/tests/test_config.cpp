#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qbs/config.hpp"

using namespace qbs;

TEST_CASE("defaults are valid and resolve bucket counts per model") {
  ModelConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.buckets_per_dim() == 500);
  c.model_kind = ModelKind::Rotation2D;
  CHECK(c.buckets_per_dim() == 50);
  c.n_buckets = 80;
  CHECK(c.buckets_per_dim() == 80);
}

TEST_CASE("parse_config reads every key and ignores comments") {
  const auto c = parse_config(R"(# experiment
model_kind = rotation
eps_transform = 0.1   # trailing comment
g1_coeff = 0.02
g2_coeff = 0.03
x0 = 2
spread0 = 0.05
n_paths = 1000
n_buckets = 40
n_steps = 7
dt = 0.5
seed = 99
blur_mean_sign = proposition_literal
density_floor_mult = 2
)");
  CHECK(c.model_kind == ModelKind::Rotation2D);
  CHECK(c.eps_transform == 0.1);
  CHECK(c.g1_coeff == 0.02);
  CHECK(c.g2_coeff == 0.03);
  CHECK(c.x0 == 2.0);
  CHECK(c.spread0 == 0.05);
  CHECK(c.n_paths == 1000);
  CHECK(c.n_buckets == 40);
  CHECK(c.n_steps == 7);
  CHECK(c.dt == 0.5);
  CHECK(c.seed == 99);
  CHECK(c.blur_mean_sign == BlurMeanSign::PropositionLiteral);
  CHECK(c.density_floor_mult == 2.0);
}

TEST_CASE("config errors name the offending key") {
  const auto key_of = [](const char* text) {
    try {
      parse_config(text).validate();
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<no error>");
  };
  CHECK(key_of("eps_transfrom = 0.1\n") == "eps_transfrom");
  CHECK(key_of("n_paths = ten\n") == "n_paths");
  CHECK(key_of("model_kind = shear\n") == "model_kind");
  CHECK(key_of("x0 = -1\n") == "x0");
  CHECK(key_of("dt = 0\n") == "dt");
}

TEST_CASE("format_config round-trips through parse_config") {
  ModelConfig c;
  c.eps_transform = 0.1 + 0.2;  // not exactly representable in short decimal
  c.seed = 12345678901234ull;
  c.n_buckets = 321;
  CHECK(parse_config(format_config(c)) == c);
  ModelConfig d;  // n_buckets = 0 resolves to the model default
  auto back = parse_config(format_config(d));
  CHECK(back.n_buckets == 500);
  back.n_buckets = 0;
  CHECK(back == d);
}

TEST_CASE("load_config reports a missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/qbs.cfg"), ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "qbs_config_test.cfg";
  std::ofstream(path) << "eps_transform = 0.02\n";
  CHECK(load_config(path).eps_transform == 0.02);
  std::filesystem::remove(path);
}

TEST_CASE("enum text forms") {
  CHECK(to_string(ModelKind::Translation1D) == "translation");
  CHECK(parse_model_kind("rotation") == ModelKind::Rotation2D);
  CHECK(to_string(BlurMeanSign::SectionFourFour) == "section_four_four");
  CHECK(parse_blur_mean_sign("proposition_literal") == BlurMeanSign::PropositionLiteral);
}
