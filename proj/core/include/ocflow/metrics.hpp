#pragma once

#include "ocflow/field.hpp"

namespace ocflow {

/// Root-mean-square difference between an interpolated frame and a reference:
/// sqrt( (1 / MN) sum (u - u_ref)^2 ). With crop_border > 0 the outermost
/// crop_border pixels are excluded on every side.
double interpolation_error(const ScalarField& u, const ScalarField& u_true, int crop_border = 0);

/// Anisotropic discrete total variation: h * (sum of |forward differences|
/// in x plus in y), differences taken wherever both samples exist.
double total_variation(const ScalarField& u);

/// h^2 * sum of all samples.
double mass(const ScalarField& u);

/// Largest centered-difference divergence magnitude over interior pixels.
double max_divergence(const VectorField& b);

/// Quantitative evaluation summary serialized into run metadata.
struct EvalReport {
  double ie = 0.0;
  double mass_drift = 0.0;
  double tv_ratio = 0.0;
  double div_residual = 0.0;
};

}  // namespace ocflow
