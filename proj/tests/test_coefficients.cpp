#include <doctest.h>

#include "qbs/coefficients.hpp"

using namespace qbs;

TEST_CASE("translation coefficients") {
  const CoefficientFunctions c(ModelKind::Translation1D, 0.02, 0.01, 0.0);
  CHECK(c.g1(2.0, 0.0) == doctest::Approx(0.04));
  CHECK(c.f1(5.0, 3.0) == 0.02);
  CHECK(c.g2(1.0, 1.0) == 0.0);
  CHECK(c.f2(1.0, 1.0) == 0.0);
}

TEST_CASE("rotation coefficients follow the small-angle expansion") {
  const double eps = 0.1;
  const CoefficientFunctions c(ModelKind::Rotation2D, eps, 0.01, 0.04);
  const double x = 1.5, e = 0.2;
  CHECK(c.f1(x, e) == doctest::Approx(eps * e - 0.5 * eps * eps * x));
  CHECK(c.f2(x, e) == doctest::Approx(-eps * x - 0.5 * eps * eps * e));
  CHECK(c.g1(x, e) == doctest::Approx(0.01 * x * x));
  CHECK(c.g2(x, e) == doctest::Approx(0.04 * e * e));
}

TEST_CASE("negative diffusion coefficients are rejected") {
  CHECK_THROWS(CoefficientFunctions(ModelKind::Translation1D, 0.0, -0.01, 0.0));
  ModelConfig cfg;
  cfg.g1_coeff = -1.0;
  CHECK_THROWS(eval_coefficients(cfg));
}
