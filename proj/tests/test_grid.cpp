#include <doctest.h>

#include <cmath>

#include "ocflow/field.hpp"
#include "ocflow/resample.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ocflow;
using namespace ocflow::testing;

TEST_CASE("field containers enforce the minimum stencil size") {
  CHECK_THROWS_AS(ScalarField(3, 10), DimensionError);
  CHECK_THROWS_AS(ScalarField(10, 3), DimensionError);
  CHECK_THROWS_AS(VectorField(2, 2), DimensionError);
  CHECK_NOTHROW(ScalarField(4, 4));
}

TEST_CASE("time flow samples are piecewise constant slots") {
  TimeFlow flow = TimeFlow::zero(8, 8, 2.0, 4);
  CHECK(flow.slot_duration() == doctest::Approx(0.5));
  CHECK(flow.sample_index(0.0) == 0);
  CHECK(flow.sample_index(0.49) == 0);
  CHECK(flow.sample_index(0.5) == 1);
  CHECK(flow.sample_index(1.99) == 3);
  CHECK(flow.sample_index(2.0) == 3);  // clamped at the horizon
}

TEST_CASE("downsample rejects inputs below 8x8") {
  CHECK_THROWS_AS(downsample_bicubic(ScalarField(7, 16)), DimensionError);
  CHECK_THROWS_AS(downsample_bicubic(ScalarField(16, 7)), DimensionError);
}

TEST_CASE("downsample reproduces constants exactly") {
  ScalarField f(16, 16, 42.5);
  const ScalarField g = downsample_bicubic(f);
  REQUIRE(g.width() == 8);
  REQUIRE(g.height() == 8);
  for (double x : g.values()) CHECK(x == doctest::Approx(42.5).epsilon(1e-14));
}

TEST_CASE("downsample of a linear ramp doubles the index-space slope") {
  ScalarField f(16, 16);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 16; ++i) f(i, j) = static_cast<double>(i);
  }
  const ScalarField g = downsample_bicubic(f);
  for (int j = 0; j < g.height(); ++j) {
    for (int i = 0; i < g.width(); ++i) {
      CHECK(g(i, j) == doctest::Approx(2.0 * i).epsilon(1e-9));
    }
  }
}

TEST_CASE("downsample matches the dense bicubic reference at (2i, 2j)") {
  const ScalarField f = random_field(16, 16, 11u);
  const ScalarField g = downsample_bicubic(f);
  for (int j = 0; j < g.height(); ++j) {
    for (int i = 0; i < g.width(); ++i) {
      CHECK(g(i, j) == doctest::Approx(bicubic_reference(f, 2.0 * i, 2.0 * j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("bicubic point samples match the reference at fractional points") {
  const ScalarField f = random_field(16, 12, 12u);
  const double xs[] = {0.3, 1.7, 7.25, 14.9, 15.0};
  const double ys[] = {0.0, 0.6, 5.5, 10.2, 11.0};
  for (double x : xs) {
    for (double y : ys) {
      CHECK(bicubic_at(f, x, y) ==
            doctest::Approx(bicubic_reference(f, x, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("flow upsampling: zero stays zero, constants scale") {
  VectorField zero(8, 8);
  const VectorField up = upsample_flow_bicubic(zero, 16, 16);
  REQUIRE(up.width() == 16);
  for (double x : up.v_values()) CHECK(x == 0.0);
  for (double x : up.w_values()) CHECK(x == 0.0);

  VectorField uni(8, 8);
  for (double& x : uni.v_values()) x = 1.0;
  const VectorField up2 = upsample_flow_bicubic(uni, 16, 16);
  for (int j = 1; j < 15; ++j) {
    for (int i = 1; i < 15; ++i) {
      CHECK(up2.v(i, j) == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(up2.w(i, j) == 0.0);
    }
  }
  CHECK(up2.boundary_is_zero());
}

TEST_CASE("flow upsampling matches the dense reference times the scale factor") {
  std::mt19937 rng(21u);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  VectorField b(8, 8);
  for (double& x : b.v_values()) x = dist(rng);
  for (double& x : b.w_values()) x = dist(rng);
  ScalarField vs(8, 8);
  ScalarField ws(8, 8);
  vs.values() = b.v_values();
  ws.values() = b.w_values();

  const VectorField up = upsample_flow_bicubic(b, 16, 16);
  const double scale = 16.0 / 8.0;
  for (int j = 1; j < 15; ++j) {
    for (int i = 1; i < 15; ++i) {
      CHECK(up.v(i, j) ==
            doctest::Approx(scale * bicubic_reference(vs, 0.5 * i, 0.5 * j)).epsilon(1e-9));
      CHECK(up.w(i, j) ==
            doctest::Approx(scale * bicubic_reference(ws, 0.5 * i, 0.5 * j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("flow upsampling rejects a mismatched aspect ratio") {
  VectorField b(8, 8);
  CHECK_THROWS_AS(upsample_flow_bicubic(b, 20, 16), DimensionError);
  CHECK_NOTHROW(upsample_flow_bicubic(b, 15, 16));  // ceil(15/2) == 8
}

TEST_CASE("warp by the identity map is the identity") {
  const ScalarField f = random_field(12, 9, 31u);
  const ScalarField g = warp(f, BacktraceMap::identity(12, 9));
  CHECK(max_abs_diff(f, g) <= 1e-12);
}

TEST_CASE("warp by an integer shift moves samples exactly") {
  const ScalarField f = random_field(16, 10, 32u);
  BacktraceMap m(16, 10);
  for (int j = 0; j < 10; ++j) {
    for (int i = 0; i < 16; ++i) {
      m.x(i, j) = std::clamp(i - 3, 0, 15);
      m.y(i, j) = j;
    }
  }
  const ScalarField g = warp(f, m);
  for (int j = 0; j < 10; ++j) {
    for (int i = 3; i < 16; ++i) CHECK(g(i, j) == doctest::Approx(f(i - 3, j)).epsilon(1e-12));
  }
}

TEST_CASE("warp reproduces a linear ramp under a half-pixel shift") {
  ScalarField f(16, 16);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 16; ++i) f(i, j) = 3.0 * i + 1.0;
  }
  BacktraceMap m(16, 16);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 16; ++i) {
      m.x(i, j) = std::min(i + 0.5, 15.0);
      m.y(i, j) = j;
    }
  }
  const ScalarField g = warp(f, m);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 14; ++i) {
      CHECK(g(i, j) == doctest::Approx(3.0 * (i + 0.5) + 1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("warp output stays within the spline overshoot bound") {
  const ScalarField f = random_field(20, 20, 33u, 0.0, 255.0);
  BacktraceMap m(20, 20);
  std::mt19937 rng(34u);
  std::uniform_real_distribution<double> jitter(-1.5, 1.5);
  for (int j = 0; j < 20; ++j) {
    for (int i = 0; i < 20; ++i) {
      m.x(i, j) = std::clamp(i + jitter(rng), 0.0, 19.0);
      m.y(i, j) = std::clamp(j + jitter(rng), 0.0, 19.0);
    }
  }
  const ScalarField g = warp(f, m);
  REQUIRE(g.all_finite());
  const auto [mn, mx] = std::minmax_element(f.values().begin(), f.values().end());
  const double range = *mx - *mn;
  for (double x : g.values()) {
    CHECK(x >= *mn - 0.25 * range);
    CHECK(x <= *mx + 0.25 * range);
  }
}

TEST_CASE("bilinear flow sampling: integers, midpoints, random oracle") {
  VectorField b(6, 5);
  std::mt19937 rng(41u);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (double& x : b.v_values()) x = dist(rng);
  for (double& x : b.w_values()) x = dist(rng);

  // stored value at integer coordinates
  CHECK(sample_flow_bilinear(b, 2.0, 3.0).first == b.v(2, 3));
  CHECK(sample_flow_bilinear(b, 2.0, 3.0).second == b.w(2, 3));

  // midpoint of four pixels with v values {0, 0, 2, 2} averages to 1
  VectorField mid(4, 4);
  mid.v(1, 1) = 0.0;
  mid.v(2, 1) = 0.0;
  mid.v(1, 2) = 2.0;
  mid.v(2, 2) = 2.0;
  CHECK(sample_flow_bilinear(mid, 1.5, 1.5).first == doctest::Approx(1.0));

  ScalarField vs(6, 5);
  vs.values() = b.v_values();
  std::uniform_real_distribution<double> px(0.0, 5.0);
  std::uniform_real_distribution<double> py(0.0, 4.0);
  for (int k = 0; k < 50; ++k) {
    const double x = px(rng);
    const double y = py(rng);
    CHECK(sample_flow_bilinear(b, x, y).first ==
          doctest::Approx(bilinear_reference(vs, x, y)).epsilon(1e-13));
  }
}

TEST_CASE("bilinear sampling is exact on fields linear in x and y") {
  VectorField b(8, 8);
  for (int j = 0; j < 8; ++j) {
    for (int i = 0; i < 8; ++i) {
      b.v(i, j) = 2.0 * i - 3.0 * j + 0.25;
      b.w(i, j) = -1.5 * i + 0.5 * j;
    }
  }
  std::mt19937 rng(51u);
  std::uniform_real_distribution<double> c(0.0, 7.0);
  for (int k = 0; k < 30; ++k) {
    const double x = c(rng);
    const double y = c(rng);
    const auto [v, w] = sample_flow_bilinear(b, x, y);
    CHECK(v == doctest::Approx(2.0 * x - 3.0 * y + 0.25).epsilon(1e-12));
    CHECK(w == doctest::Approx(-1.5 * x + 0.5 * y).epsilon(1e-12));
  }
}
