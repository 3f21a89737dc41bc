#pragma once

#include <span>
#include <vector>

#include "ocflow/field.hpp"

namespace ocflow {

/// Time-step selection for the explicit TVD scheme: dt is chosen so that
/// sigma = max(|v|_max, |w|_max) * dt / h equals sigma_target.
struct CflPolicy {
  double sigma_target = 0.1;

  /// Stable step for one flow sample; +infinity when the flow is zero.
  double dt_for(const VectorField& b) const;
};

/// Superbee flux limiter max(0, min(2r, 1), min(r, 2)).
double superbee(double r);

/// One explicit flux-limited upwind update of the transport equation
/// u_t + v u_x + w u_y = 0. Boundary stencils use edge-replicated ghost
/// values. Throws CflError when max speed * dt / h exceeds 1.
ScalarField tvd_step(const ScalarField& u, const VectorField& b, double dt);

/// States of a transport solve at the requested times.
struct TransportTrajectory {
  std::vector<double> times;
  std::vector<ScalarField> states;
};

/// March u0 forward with tvd_step, using the policy step width per
/// piecewise-constant flow slot and shortening the final substep to land on
/// every sample time exactly. sample_times must be sorted and lie in
/// [0, horizon].
TransportTrajectory solve_transport_tvd(const ScalarField& u0, const TimeFlow& flow,
                                        std::span<const double> sample_times,
                                        const CflPolicy& policy = {});

/// Solve the terminal-value problem p_t + b . grad p = 0, p(T) = pT by
/// running the forward scheme on the time-reversed, sign-flipped flow.
/// Returned samples are indexed by the original time t.
TransportTrajectory solve_transport_backward(const ScalarField& pT, const TimeFlow& flow,
                                             std::span<const double> sample_times,
                                             const CflPolicy& policy = {});

/// The flow b~(t') = -b(T - t'), which turns backward transport under b into
/// forward transport under b~.
TimeFlow time_reversed(const TimeFlow& flow);

/// Integrate the backward flow ODE dPhi/ds = b(s, Phi) from s = t down to
/// s = 0 for every pixel start with classic RK4; flow values are fetched by
/// bilinear interpolation and held piecewise-constant in time. Foot points
/// are clamped to the grid rectangle.
BacktraceMap backtrace_rk4(const TimeFlow& flow, double t, double dt_ode = 0.1);

/// Characteristic (semi-Lagrangian) solution u(t, x) = u0(Phi^{-1}(t, x)):
/// spline-warp u0 by the RK4 backtrace map.
ScalarField solve_transport_characteristic(const ScalarField& u0, const TimeFlow& flow, double t,
                                           double dt_ode = 0.1);

/// Characteristic solve of the terminal-value (adjoint) problem: the value at
/// time t of the state transported backward from its condition at the horizon.
ScalarField solve_backward_characteristic(const ScalarField& terminal, const TimeFlow& flow,
                                          double t, double dt_ode = 0.1);

}  // namespace ocflow
