#include <doctest.h>

#include <cmath>

#include "ocflow/metrics.hpp"
#include "support/fixtures.hpp"

using namespace ocflow;
using namespace ocflow::testing;

TEST_CASE("interpolation error basics") {
  const ScalarField a = random_field(10, 8, 7u);
  CHECK(interpolation_error(a, a) == 0.0);

  ScalarField b = a;
  for (double& x : b.values()) x += 2.0;
  CHECK(interpolation_error(a, b) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(interpolation_error(a, ScalarField(8, 10)), DimensionError);
}

TEST_CASE("interpolation error is symmetric and intensity-shift equivariant") {
  const ScalarField a = random_field(12, 12, 8u);
  const ScalarField b = random_field(12, 12, 9u);
  CHECK(interpolation_error(a, b) == interpolation_error(b, a));
  CHECK(interpolation_error(a, b) > 0.0);

  ScalarField ac = a;
  ScalarField bc = b;
  for (double& x : ac.values()) x += 17.0;
  for (double& x : bc.values()) x += 17.0;
  // shifting both operands by the same constant keeps every difference
  // bit-identical
  CHECK(interpolation_error(ac, bc) == interpolation_error(a, b));
}

TEST_CASE("interpolation error with a cropped border") {
  ScalarField a(8, 8, 0.0);
  ScalarField b(8, 8, 0.0);
  b(0, 0) = 80.0;  // corner damage only
  CHECK(interpolation_error(a, b) > 0.0);
  CHECK(interpolation_error(a, b, 1) == 0.0);
  CHECK_THROWS_AS(interpolation_error(a, b, 4), DimensionError);
}

TEST_CASE("total variation closed-form counts") {
  ScalarField flat(10, 8, 5.0);
  CHECK(total_variation(flat) == 0.0);

  // unit step inside one row: for i >= 6 row 3 is raised by 1. The forward
  // x-differences contribute exactly 1; each raised pixel differs from its
  // vertical neighbours above and below, adding 2 * 4.
  ScalarField step(10, 8, 5.0);
  for (int i = 6; i < 10; ++i) step(i, 3) = 6.0;
  CHECK(total_variation(step) == doctest::Approx(1.0 + 2.0 * 4.0).epsilon(1e-14));
}

TEST_CASE("total variation matches a direct double loop") {
  const ScalarField f = random_field(13, 11, 10u);
  double acc = 0.0;
  for (int j = 0; j < f.height(); ++j) {
    for (int i = 0; i < f.width(); ++i) {
      if (i + 1 < f.width()) acc += std::abs(f(i + 1, j) - f(i, j));
      if (j + 1 < f.height()) acc += std::abs(f(i, j + 1) - f(i, j));
    }
  }
  CHECK(total_variation(f) == doctest::Approx(acc).epsilon(1e-13));
}

TEST_CASE("mass is the h^2-weighted sum") {
  ScalarField zero(6, 6, 0.0);
  CHECK(mass(zero) == 0.0);

  ScalarField ones(7, 5, 1.0);
  CHECK(mass(ones) == doctest::Approx(35.0).epsilon(1e-14));

  const ScalarField f = random_field(9, 9, 12u);
  double acc = 0.0;
  for (double x : f.values()) acc += x;
  CHECK(mass(f) == doctest::Approx(acc).epsilon(1e-13));

  ScalarField spaced(4, 4, 1.0, 0.5);
  CHECK(mass(spaced) == doctest::Approx(0.25 * 16).epsilon(1e-14));
}
