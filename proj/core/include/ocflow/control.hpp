#pragma once

#include <vector>

#include "ocflow/field.hpp"
#include "ocflow/stokes.hpp"
#include "ocflow/transport.hpp"

namespace ocflow {

enum class TransportScheme { kCharacteristic, kTvd };
enum class LambdaSchedule { kConstant, kGeometric };
enum class LoopVariant { kLoopI = 1, kLoopII = 2 };

/// All solver knobs of the outer optimal-control iteration.
struct RunConfig {
  double horizon = 1.0;
  int n_loop = 10;
  /// Regularization weight at the coarsest pyramid level.
  double lambda_star = 1.7782794100389227e5;  // 10^5.25
  /// Loop I varies lambda along a schedule; kConstant pins it to lambda_star.
  LambdaSchedule lambda_schedule = LambdaSchedule::kGeometric;
  double kappa = 1.2589254117941673;  // 10^0.1
  int pyramid_levels = 3;
  /// Per-level growth of lambda toward finer levels, in [10^0.2, 10^0.5].
  double lambda_level_ratio = 2.2387211385683394;  // 10^0.35
  double sigma_cfl = 0.1;
  double dt_ode = 0.1;
  int n_t = 1;
  TransportScheme scheme = TransportScheme::kCharacteristic;
  /// Loop II stops once the relative change of the terminal mismatch over two
  /// successive iterations falls below this.
  double stop_tol = 1e-3;
  double stokes_tol = 1e-8;
  int stokes_max_iter = 0;  // 0: solver default

  void validate() const;
};

/// Snapshot of one outer iteration: the flow iterate and the two cost terms.
/// reg_term carries the lambda/2-weighted gradient energy of the flow, with
/// lambda the value used by the update that produced this iterate (the first
/// scheduled lambda for the initial entry).
struct LoopState {
  int iteration = 0;
  TimeFlow flow;
  double terminal_mismatch = 0.0;  // || u(T) - u_T ||_L2
  double data_term = 0.0;          // 1/2 mismatch^2
  double reg_term = 0.0;
};

struct LoopResult {
  TimeFlow flow;
  std::vector<LoopState> history;  // entry n describes iterate b^n; entry 0 is b_init
};

/// Terminal adjoint condition p(T) = -(u(T)_computed - u(T)_given).
ScalarField adjoint_terminal(const ScalarField& uT_computed, const ScalarField& uT_given);

/// Stokes right-hand side (p u_x, p u_y) with centered three-point gradients,
/// one-sided at the edges, boundary ring zeroed afterwards.
VectorField control_rhs(const ScalarField& p, const ScalarField& u);

/// Time-integrated squared gradient energy of the flow,
/// sum_k (T/N) h^2 sum |grad v|^2 + |grad w|^2 (three-point stencils).
double flow_gradient_energy(const TimeFlow& flow);

/// Cost functional value: data_term + lambda/2 * gradient energy of flow.
double cost(const LoopState& state, const TimeFlow& flow, double lambda);

/// Alternate state / adjoint / control updates with a monotonically
/// decreasing lambda schedule; iteration n replaces the flow by the Stokes
/// solution driven by p grad u.
LoopResult segregation_loop_i(const ScalarField& u0, const ScalarField& uT, const RunConfig& cfg,
                              const TimeFlow& b_init);

/// Same state and adjoint steps, but the Stokes solve (at fixed lambda)
/// yields an increment that accumulates onto the flow; stops early on
/// terminal-mismatch stagnation.
LoopResult segregation_loop_ii(const ScalarField& u0, const ScalarField& uT, const RunConfig& cfg,
                               const TimeFlow& b_init);

/// Scalar per-iteration record kept for run metadata.
struct IterationStats {
  int iteration = 0;
  double terminal_mismatch = 0.0;
  double data_term = 0.0;
  double reg_term = 0.0;
};

struct LevelReport {
  int level = 0;
  int width = 0;
  int height = 0;
  double lambda = 0.0;
  std::vector<IterationStats> iterations;
};

/// Coarse-to-fine driver: solve on bicubically downsampled images first,
/// upsample the flow as the next level's start value (zero at the coarsest
/// level). The requested depth is reduced if the images become too small to
/// halve again. Per-level lambda grows by lambda_level_ratio toward fine
/// levels, anchored at lambda_star on the coarsest level.
TimeFlow hierarchical_solve(const ScalarField& u0, const ScalarField& uT, const RunConfig& cfg,
                            LoopVariant loop, std::vector<LevelReport>* reports = nullptr);

/// Average of the forward interpolation of u0 at t and the backward
/// interpolation of uT at T - t (flow_bwd estimated from the swapped pair).
ScalarField interpolate_at(const ScalarField& u0, const ScalarField& uT, const TimeFlow& flow_fwd,
                           const TimeFlow& flow_bwd, double t, const RunConfig& cfg);

/// One-sided transport of a frame under a flow, honoring cfg.scheme.
ScalarField transport_frame(const ScalarField& frame, const TimeFlow& flow, double t,
                            const RunConfig& cfg);

}  // namespace ocflow
