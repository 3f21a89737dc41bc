#include "ocflow/metrics.hpp"

#include <cmath>

namespace ocflow {

double interpolation_error(const ScalarField& u, const ScalarField& u_true, int crop_border) {
  if (!u.same_shape(u_true)) {
    throw DimensionError("interpolation_error: fields disagree on dimensions");
  }
  const int c = crop_border;
  if (2 * c >= u.width() || 2 * c >= u.height()) {
    throw DimensionError("interpolation_error: crop border leaves no pixels");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (int j = c; j < u.height() - c; ++j) {
    for (int i = c; i < u.width() - c; ++i) {
      const double d = u(i, j) - u_true(i, j);
      acc += d * d;
      ++count;
    }
  }
  return std::sqrt(acc / static_cast<double>(count));
}

double total_variation(const ScalarField& u) {
  double acc = 0.0;
  for (int j = 0; j < u.height(); ++j) {
    for (int i = 0; i + 1 < u.width(); ++i) acc += std::abs(u(i + 1, j) - u(i, j));
  }
  for (int j = 0; j + 1 < u.height(); ++j) {
    for (int i = 0; i < u.width(); ++i) acc += std::abs(u(i, j + 1) - u(i, j));
  }
  return u.spacing() * acc;
}

double mass(const ScalarField& u) {
  double acc = 0.0;
  for (double x : u.values()) acc += x;
  return u.spacing() * u.spacing() * acc;
}

double max_divergence(const VectorField& b) {
  const double inv2h = 0.5 / b.spacing();
  double worst = 0.0;
  for (int j = 1; j + 1 < b.height(); ++j) {
    for (int i = 1; i + 1 < b.width(); ++i) {
      const double div =
          (b.v(i + 1, j) - b.v(i - 1, j)) * inv2h + (b.w(i, j + 1) - b.w(i, j - 1)) * inv2h;
      worst = std::max(worst, std::abs(div));
    }
  }
  return worst;
}

}  // namespace ocflow
