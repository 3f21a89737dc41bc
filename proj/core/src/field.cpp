#include "ocflow/field.hpp"

#include <algorithm>
#include <cmath>

namespace ocflow {

namespace {

void check_min_dims(int width, int height, const char* what) {
  if (width < kMinFieldDim || height < kMinFieldDim) {
    throw DimensionError(std::string(what) + ": dimensions " + std::to_string(width) + "x" +
                         std::to_string(height) + " below minimum " +
                         std::to_string(kMinFieldDim) + "x" + std::to_string(kMinFieldDim));
  }
}

bool finite_range(const std::vector<double>& xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

ScalarField::ScalarField(int width, int height, double value, double spacing)
    : width_(width), height_(height), spacing_(spacing) {
  check_min_dims(width, height, "ScalarField");
  values_.assign(static_cast<std::size_t>(width) * height, value);
}

double ScalarField::at_clamped(int i, int j) const {
  i = std::clamp(i, 0, width_ - 1);
  j = std::clamp(j, 0, height_ - 1);
  return (*this)(i, j);
}

bool ScalarField::all_finite() const { return finite_range(values_); }

VectorField::VectorField(int width, int height, double spacing)
    : width_(width), height_(height), spacing_(spacing) {
  check_min_dims(width, height, "VectorField");
  v_.assign(static_cast<std::size_t>(width) * height, 0.0);
  w_.assign(static_cast<std::size_t>(width) * height, 0.0);
}

bool VectorField::all_finite() const { return finite_range(v_) && finite_range(w_); }

double VectorField::max_speed() const {
  double mv = 0.0;
  double mw = 0.0;
  for (double x : v_) mv = std::max(mv, std::abs(x));
  for (double x : w_) mw = std::max(mw, std::abs(x));
  return std::max(mv, mw);
}

void VectorField::zero_boundary() {
  for (int i = 0; i < width_; ++i) {
    v(i, 0) = w(i, 0) = 0.0;
    v(i, height_ - 1) = w(i, height_ - 1) = 0.0;
  }
  for (int j = 0; j < height_; ++j) {
    v(0, j) = w(0, j) = 0.0;
    v(width_ - 1, j) = w(width_ - 1, j) = 0.0;
  }
}

bool VectorField::boundary_is_zero() const {
  for (int i = 0; i < width_; ++i) {
    if (v(i, 0) != 0.0 || w(i, 0) != 0.0) return false;
    if (v(i, height_ - 1) != 0.0 || w(i, height_ - 1) != 0.0) return false;
  }
  for (int j = 0; j < height_; ++j) {
    if (v(0, j) != 0.0 || w(0, j) != 0.0) return false;
    if (v(width_ - 1, j) != 0.0 || w(width_ - 1, j) != 0.0) return false;
  }
  return true;
}

VectorField& VectorField::operator+=(const VectorField& other) {
  if (!same_shape(other)) throw DimensionError("VectorField +=: shape mismatch");
  for (std::size_t k = 0; k < v_.size(); ++k) {
    v_[k] += other.v_[k];
    w_[k] += other.w_[k];
  }
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (std::size_t k = 0; k < v_.size(); ++k) {
    v_[k] *= s;
    w_[k] *= s;
  }
  return *this;
}

TimeFlow::TimeFlow(double horizon, std::vector<VectorField> samples)
    : horizon_(horizon), samples_(std::move(samples)) {
  if (horizon_ <= 0.0) throw Error("TimeFlow: horizon must be positive");
  if (samples_.empty()) throw Error("TimeFlow: needs at least one sample");
  for (const VectorField& s : samples_) {
    if (!s.same_shape(samples_.front())) {
      throw DimensionError("TimeFlow: samples disagree on dimensions");
    }
  }
}

TimeFlow TimeFlow::zero(int width, int height, double horizon, int n_samples, double spacing) {
  std::vector<VectorField> samples(static_cast<std::size_t>(n_samples),
                                   VectorField(width, height, spacing));
  return TimeFlow(horizon, std::move(samples));
}

int TimeFlow::sample_index(double t) const {
  const int n = sample_count();
  const int k = static_cast<int>(std::floor(t / horizon_ * n));
  return std::clamp(k, 0, n - 1);
}

BacktraceMap::BacktraceMap(int width, int height) : width_(width), height_(height) {
  x_.assign(static_cast<std::size_t>(width) * height, 0.0);
  y_.assign(static_cast<std::size_t>(width) * height, 0.0);
}

BacktraceMap BacktraceMap::identity(int width, int height) {
  BacktraceMap m(width, height);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      m.x(i, j) = i;
      m.y(i, j) = j;
    }
  }
  return m;
}

double l2_norm(const ScalarField& f) {
  double acc = 0.0;
  for (double x : f.values()) acc += x * x;
  return f.spacing() * std::sqrt(acc);
}

ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g) {
  if (!f.same_shape(g)) throw DimensionError("linear_combination: shape mismatch");
  ScalarField out(f.width(), f.height(), 0.0, f.spacing());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.values()[k] = a * f.values()[k] + b * g.values()[k];
  }
  return out;
}

}  // namespace ocflow
