#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ocflow/errors.hpp"

namespace ocflow {

inline constexpr int kMinFieldDim = 4;

/// A W x H real-valued grid sampled at pixel centers, stored row-major.
/// Index convention: (i, j) with i the x column and j the y row,
/// values[j * width + i].
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int width, int height, double value = 0.0, double spacing = 1.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(j) * width_ + i]; }
  double operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(j) * width_ + i];
  }

  /// Edge-replicated fetch: indices outside the grid are clamped.
  double at_clamped(int i, int j) const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const ScalarField& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

 private:
  int width_ = 0;
  int height_ = 0;
  double spacing_ = 1.0;
  std::vector<double> values_;
};

/// A W x H grid of flow vectors (v, w) at pixel centers; one time sample
/// of the transporting field. The model poses b = 0 on the domain boundary,
/// so flows produced by the solvers carry a zero outer ring.
class VectorField {
 public:
  VectorField() = default;
  VectorField(int width, int height, double spacing = 1.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return v_.size(); }

  double& v(int i, int j) { return v_[static_cast<std::size_t>(j) * width_ + i]; }
  double v(int i, int j) const { return v_[static_cast<std::size_t>(j) * width_ + i]; }
  double& w(int i, int j) { return w_[static_cast<std::size_t>(j) * width_ + i]; }
  double w(int i, int j) const { return w_[static_cast<std::size_t>(j) * width_ + i]; }

  std::vector<double>& v_values() { return v_; }
  const std::vector<double>& v_values() const { return v_; }
  std::vector<double>& w_values() { return w_; }
  const std::vector<double>& w_values() const { return w_; }

  bool same_shape(const VectorField& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

  /// max(|v|_max, |w|_max), the speed entering the CFL bound.
  double max_speed() const;

  void zero_boundary();
  bool boundary_is_zero() const;

  /// In-place accumulation, used by the incremental control update.
  VectorField& operator+=(const VectorField& other);
  VectorField& operator*=(double s);

 private:
  int width_ = 0;
  int height_ = 0;
  double spacing_ = 1.0;
  std::vector<double> v_;
  std::vector<double> w_;
};

/// Piecewise-constant-in-time flow over [0, horizon]: sample k is valid on
/// [k T / N, (k+1) T / N).
class TimeFlow {
 public:
  TimeFlow() = default;
  TimeFlow(double horizon, std::vector<VectorField> samples);

  static TimeFlow zero(int width, int height, double horizon, int n_samples = 1,
                       double spacing = 1.0);

  double horizon() const { return horizon_; }
  int sample_count() const { return static_cast<int>(samples_.size()); }
  double slot_duration() const { return horizon_ / sample_count(); }

  const VectorField& sample(int k) const { return samples_[k]; }
  VectorField& sample(int k) { return samples_[k]; }

  /// Index of the sample valid at time t (clamped to [0, N-1]).
  int sample_index(double t) const;
  const VectorField& sample_at(double t) const { return samples_[sample_index(t)]; }

  int width() const { return samples_.front().width(); }
  int height() const { return samples_.front().height(); }
  double spacing() const { return samples_.front().spacing(); }

 private:
  double horizon_ = 0.0;
  std::vector<VectorField> samples_;
};

/// Per-pixel foot points of backward characteristics: pixel (i, j) maps to
/// continuous grid coordinates (x(i,j), y(i,j)), clamped to the grid
/// rectangle [0, W-1] x [0, H-1].
class BacktraceMap {
 public:
  BacktraceMap() = default;
  BacktraceMap(int width, int height);

  static BacktraceMap identity(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  double& x(int i, int j) { return x_[static_cast<std::size_t>(j) * width_ + i]; }
  double x(int i, int j) const { return x_[static_cast<std::size_t>(j) * width_ + i]; }
  double& y(int i, int j) { return y_[static_cast<std::size_t>(j) * width_ + i]; }
  double y(int i, int j) const { return y_[static_cast<std::size_t>(j) * width_ + i]; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Discrete L2 norm sqrt(h^2 sum f^2).
double l2_norm(const ScalarField& f);

/// a * f + b * g, elementwise; shapes must match.
ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g);

}  // namespace ocflow
