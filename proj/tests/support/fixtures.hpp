#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "ocflow/field.hpp"

namespace ocflow::testing {

/// Deterministic uniform noise field.
inline ScalarField random_field(int w, int h, unsigned seed, double lo = 0.0, double hi = 255.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ScalarField f(w, h);
  for (double& x : f.values()) x = dist(rng);
  return f;
}

inline VectorField random_flow(int w, int h, unsigned seed, double amplitude = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  VectorField b(w, h);
  for (double& x : b.v_values()) x = dist(rng);
  for (double& x : b.w_values()) x = dist(rng);
  return b;
}

/// Smoothed disk on a constant background (background 20, disk 200).
inline ScalarField disk_image(int n, double cx, double cy, double radius) {
  ScalarField f(n, n, 20.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double r = std::hypot(i - cx, j - cy);
      const double t = std::clamp((radius + 0.75 - r) / 1.5, 0.0, 1.0);
      f(i, j) = 20.0 + 180.0 * (t * t * (3.0 - 2.0 * t));
    }
  }
  return f;
}

/// Gaussian bump amplitude * exp(-r^2 / (2 sigma^2)) centered at (cx, cy).
inline ScalarField gaussian_blob(int w, int h, double cx, double cy, double sigma,
                                 double amplitude = 100.0) {
  ScalarField f(w, h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const double dx = i - cx;
      const double dy = j - cy;
      f(i, j) = amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  }
  return f;
}

/// Uniform flow (v0, w0) everywhere, including the boundary ring.
inline TimeFlow uniform_flow(int w, int h, double v0, double w0, double horizon = 1.0) {
  VectorField b(w, h);
  for (double& x : b.v_values()) x = v0;
  for (double& x : b.w_values()) x = w0;
  return TimeFlow(horizon, {b});
}

/// Rigid rotation omega about the grid center, boundary ring zeroed.
inline VectorField rotation_flow(int n, double omega) {
  const double c = (n - 1) / 2.0;
  VectorField b(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      b.v(i, j) = -omega * (j - c);
      b.w(i, j) = omega * (i - c);
    }
  }
  b.zero_boundary();
  return b;
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a.values()[k] - b.values()[k]));
  }
  return worst;
}

inline double l2_diff(const ScalarField& a, const ScalarField& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a.values()[k] - b.values()[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace ocflow::testing
