#pragma once

#include <algorithm>
#include <cmath>

#include "ocflow/field.hpp"

namespace ocflow::testing {

// Reference bicubic evaluation, written as a direct convolution sum over the
// 4x4 neighborhood with the piecewise kernel; independent of the library's
// weight-table implementation.
inline double bicubic_kernel_reference(double d) {
  constexpr double a = -0.5;
  d = std::abs(d);
  if (d < 1.0) return ((a + 2.0) * d - (a + 3.0)) * d * d + 1.0;
  if (d < 2.0) return ((a * d - 5.0 * a) * d + 8.0 * a) * d - 4.0 * a;
  return 0.0;
}

inline double bicubic_reference(const ScalarField& f, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(f.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(f.height() - 1));
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  double acc = 0.0;
  for (int j = j0 - 1; j <= j0 + 2; ++j) {
    for (int i = i0 - 1; i <= i0 + 2; ++i) {
      acc += bicubic_kernel_reference(x - i) * bicubic_kernel_reference(y - j) *
             f.at_clamped(i, j);
    }
  }
  return acc;
}

// Closed-form bilinear blend at a point, one line per weight.
inline double bilinear_reference(const ScalarField& f, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(f.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(f.height() - 1));
  const int i = std::min(static_cast<int>(std::floor(x)), f.width() - 2);
  const int j = std::min(static_cast<int>(std::floor(y)), f.height() - 2);
  const double s = x - i;
  const double t = y - j;
  return (1 - s) * (1 - t) * f(i, j) + s * (1 - t) * f(i + 1, j) + (1 - s) * t * f(i, j + 1) +
         s * t * f(i + 1, j + 1);
}

// Row total variation (1D), used by the TVD property checks.
inline double row_tv(const ScalarField& u, int j) {
  double acc = 0.0;
  for (int i = 0; i + 1 < u.width(); ++i) acc += std::abs(u(i + 1, j) - u(i, j));
  return acc;
}

}  // namespace ocflow::testing
