#pragma once

#include <utility>
#include <vector>

#include "ocflow/field.hpp"

namespace ocflow {

/// Catmull-Rom bicubic point sample (a = -0.5) with edge-replicated taps.
/// Coordinates are clamped to the grid rectangle before evaluation.
double bicubic_at(const ScalarField& f, double x, double y);

/// Halve a field to ceil(W/2) x ceil(H/2); output pixel (i, j) is the
/// bicubic sample of the input at (2i, 2j). Requires W, H >= 8.
ScalarField downsample_bicubic(const ScalarField& f);

/// Resample a flow to the next-finer pyramid dimensions. Components are
/// interpolated bicubically and scaled by target_w / W so displacements stay
/// in pixel units; the boundary ring of the result is zeroed.
VectorField upsample_flow_bicubic(const VectorField& b, int target_w, int target_h);

/// Bilinear sample of both flow components; coordinates clamped to the grid.
std::pair<double, double> sample_flow_bilinear(const VectorField& b, double x, double y);

/// Natural bicubic-spline interpolant of a field (zero second derivative at
/// the grid edges). The constructor runs an O(WH) prefilter; evaluation is a
/// local 4x4 stencil. Evaluation at integer coordinates returns the stored
/// sample exactly.
class SplineInterpolant {
 public:
  explicit SplineInterpolant(const ScalarField& f);

  double operator()(double x, double y) const;

  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;  // original data, for the integer fast path
  std::vector<double> coef_;     // (W+2) x (H+2) B-spline coefficients
};

/// Evaluate the natural spline of f at the foot points of a backtrace map.
ScalarField warp(const ScalarField& f, const BacktraceMap& map);

}  // namespace ocflow
