#include "ocflow/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ocflow/resample.hpp"

namespace ocflow {

void RunConfig::validate() const {
  if (horizon <= 0.0) throw Error("RunConfig: horizon must be positive");
  if (n_loop < 0) throw Error("RunConfig: n_loop must be non-negative");
  if (lambda_star <= 0.0) throw Error("RunConfig: lambda_star must be positive");
  if (kappa <= 1.0) throw Error("RunConfig: kappa must exceed 1");
  if (pyramid_levels < 0) throw Error("RunConfig: pyramid_levels must be non-negative");
  const double lo = std::pow(10.0, 0.2) * (1.0 - 1e-9);
  const double hi = std::pow(10.0, 0.5) * (1.0 + 1e-9);
  if (lambda_level_ratio < lo || lambda_level_ratio > hi) {
    throw Error("RunConfig: lambda_level_ratio must lie in [10^0.2, 10^0.5]");
  }
  if (sigma_cfl <= 0.0 || sigma_cfl > 1.0) throw Error("RunConfig: sigma_cfl must be in (0, 1]");
  if (dt_ode <= 0.0) throw Error("RunConfig: dt_ode must be positive");
  if (n_t < 1) throw Error("RunConfig: n_t must be at least 1");
  if (stop_tol <= 0.0) throw Error("RunConfig: stop_tol must be positive");
  if (stokes_tol <= 0.0) throw Error("RunConfig: stokes_tol must be positive");
}

ScalarField adjoint_terminal(const ScalarField& uT_computed, const ScalarField& uT_given) {
  if (!uT_computed.same_shape(uT_given)) {
    throw DimensionError("adjoint_terminal: fields disagree on dimensions");
  }
  return linear_combination(-1.0, uT_computed, 1.0, uT_given);
}

namespace {

// centered three-point gradient, one-sided at the edges
inline double grad_x(const ScalarField& u, int i, int j) {
  const double inv2h = 0.5 / u.spacing();
  if (i == 0) return (u(1, j) - u(0, j)) / u.spacing();
  if (i == u.width() - 1) return (u(i, j) - u(i - 1, j)) / u.spacing();
  return (u(i + 1, j) - u(i - 1, j)) * inv2h;
}

inline double grad_y(const ScalarField& u, int i, int j) {
  const double inv2h = 0.5 / u.spacing();
  if (j == 0) return (u(i, 1) - u(i, 0)) / u.spacing();
  if (j == u.height() - 1) return (u(i, j) - u(i, j - 1)) / u.spacing();
  return (u(i, j + 1) - u(i, j - 1)) * inv2h;
}

}  // namespace

VectorField control_rhs(const ScalarField& p, const ScalarField& u) {
  if (!p.same_shape(u)) throw DimensionError("control_rhs: fields disagree on dimensions");
  VectorField f(u.width(), u.height(), u.spacing());
  for (int j = 0; j < u.height(); ++j) {
    for (int i = 0; i < u.width(); ++i) {
      const double pij = p(i, j);
      f.v(i, j) = pij * grad_x(u, i, j);
      f.w(i, j) = pij * grad_y(u, i, j);
    }
  }
  f.zero_boundary();
  return f;
}

double flow_gradient_energy(const TimeFlow& flow) {
  double acc = 0.0;
  const double dt = flow.slot_duration();
  for (int k = 0; k < flow.sample_count(); ++k) {
    const VectorField& b = flow.sample(k);
    const double h2 = b.spacing() * b.spacing();
    // reuse the scalar-field gradient stencils on each component
    ScalarField comp(b.width(), b.height(), 0.0, b.spacing());
    double sample_acc = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      comp.values() = (pass == 0) ? b.v_values() : b.w_values();
      for (int j = 0; j < b.height(); ++j) {
        for (int i = 0; i < b.width(); ++i) {
          const double gx = grad_x(comp, i, j);
          const double gy = grad_y(comp, i, j);
          sample_acc += gx * gx + gy * gy;
        }
      }
    }
    acc += dt * h2 * sample_acc;
  }
  return acc;
}

double cost(const LoopState& state, const TimeFlow& flow, double lambda) {
  return state.data_term + 0.5 * lambda * flow_gradient_energy(flow);
}

namespace {

std::vector<double> slot_midpoints(const RunConfig& cfg) {
  std::vector<double> times(cfg.n_t);
  const double slot = cfg.horizon / cfg.n_t;
  for (int k = 0; k < cfg.n_t; ++k) times[k] = (k + 0.5) * slot;
  return times;
}

struct ForwardPass {
  std::vector<ScalarField> u_at_mid;  // state at each slot midpoint
  ScalarField u_at_horizon;
};

ForwardPass forward_pass(const ScalarField& u0, const TimeFlow& flow, const RunConfig& cfg) {
  ForwardPass fp;
  const std::vector<double> mids = slot_midpoints(cfg);
  if (cfg.scheme == TransportScheme::kCharacteristic) {
    fp.u_at_mid.reserve(mids.size());
    for (double t : mids) {
      fp.u_at_mid.push_back(solve_transport_characteristic(u0, flow, t, cfg.dt_ode));
    }
    fp.u_at_horizon = solve_transport_characteristic(u0, flow, cfg.horizon, cfg.dt_ode);
  } else {
    std::vector<double> times = mids;
    times.push_back(cfg.horizon);
    TransportTrajectory traj =
        solve_transport_tvd(u0, flow, times, CflPolicy{cfg.sigma_cfl});
    fp.u_at_horizon = std::move(traj.states.back());
    traj.states.pop_back();
    fp.u_at_mid = std::move(traj.states);
  }
  return fp;
}

std::vector<ScalarField> adjoint_pass(const ScalarField& pT, const TimeFlow& flow,
                                      const RunConfig& cfg) {
  const std::vector<double> mids = slot_midpoints(cfg);
  std::vector<ScalarField> p_at_mid;
  p_at_mid.reserve(mids.size());
  if (cfg.scheme == TransportScheme::kCharacteristic) {
    for (double t : mids) {
      p_at_mid.push_back(solve_backward_characteristic(pT, flow, t, cfg.dt_ode));
    }
  } else {
    TransportTrajectory traj =
        solve_transport_backward(pT, flow, mids, CflPolicy{cfg.sigma_cfl});
    p_at_mid = std::move(traj.states);
  }
  return p_at_mid;
}

double schedule_lambda(const RunConfig& cfg, LoopVariant variant, int update_index) {
  if (variant == LoopVariant::kLoopII || cfg.lambda_schedule == LambdaSchedule::kConstant) {
    return cfg.lambda_star;
  }
  // geometric descent lambda^n = lambda_star * kappa^(n_loop - n), n = 1..n_loop
  return cfg.lambda_star * std::pow(cfg.kappa, cfg.n_loop - update_index);
}

LoopResult run_segregation_loop(const ScalarField& u0, const ScalarField& uT,
                                const RunConfig& cfg, const TimeFlow& b_init,
                                LoopVariant variant) {
  cfg.validate();
  if (!u0.same_shape(uT)) throw DimensionError("segregation loop: frames disagree on dimensions");
  if (b_init.width() != u0.width() || b_init.height() != u0.height()) {
    throw DimensionError("segregation loop: initial flow does not match the frames");
  }

  const StokesSolver stokes(u0.width(), u0.height(), u0.spacing());
  TimeFlow flow = b_init;

  LoopResult result;
  result.history.reserve(cfg.n_loop + 1);
  double prev_mismatch = std::numeric_limits<double>::infinity();

  for (int n = 0;; ++n) {
    ForwardPass fp = forward_pass(u0, flow, cfg);
    const ScalarField residual = linear_combination(1.0, fp.u_at_horizon, -1.0, uT);
    const double mismatch = l2_norm(residual);
    if (!std::isfinite(mismatch)) {
      throw SolverError("segregation loop: non-finite cost at iteration " + std::to_string(n) +
                        "; the regularization is too weak for this problem");
    }
    const double lambda_assoc = schedule_lambda(cfg, variant, std::max(n, 1));
    LoopState state;
    state.iteration = n;
    state.flow = flow;
    state.terminal_mismatch = mismatch;
    state.data_term = 0.5 * mismatch * mismatch;
    state.reg_term = 0.5 * lambda_assoc * flow_gradient_energy(flow);
    result.history.push_back(std::move(state));

    if (n == cfg.n_loop) break;
    if (variant == LoopVariant::kLoopII && n >= 1) {
      const double rel = std::abs(mismatch - prev_mismatch) /
                         std::max(prev_mismatch, std::numeric_limits<double>::min());
      if (rel < cfg.stop_tol) break;
    }
    prev_mismatch = mismatch;

    const ScalarField pT = adjoint_terminal(fp.u_at_horizon, uT);
    const std::vector<ScalarField> p_at_mid = adjoint_pass(pT, flow, cfg);

    const double lambda_n = schedule_lambda(cfg, variant, n + 1);
    for (int k = 0; k < cfg.n_t; ++k) {
      const VectorField rhs = control_rhs(p_at_mid[k], fp.u_at_mid[k]);
      StokesSolution sol = stokes.flow_update(rhs, lambda_n, cfg.stokes_tol, cfg.stokes_max_iter);
      if (variant == LoopVariant::kLoopI) {
        flow.sample(k) = std::move(sol.b);
      } else {
        flow.sample(k) += sol.b;
      }
    }
  }

  result.flow = result.history.back().flow;
  return result;
}

}  // namespace

LoopResult segregation_loop_i(const ScalarField& u0, const ScalarField& uT, const RunConfig& cfg,
                              const TimeFlow& b_init) {
  return run_segregation_loop(u0, uT, cfg, b_init, LoopVariant::kLoopI);
}

LoopResult segregation_loop_ii(const ScalarField& u0, const ScalarField& uT, const RunConfig& cfg,
                               const TimeFlow& b_init) {
  return run_segregation_loop(u0, uT, cfg, b_init, LoopVariant::kLoopII);
}

TimeFlow hierarchical_solve(const ScalarField& u0, const ScalarField& uT, const RunConfig& cfg,
                            LoopVariant loop, std::vector<LevelReport>* reports) {
  cfg.validate();
  if (!u0.same_shape(uT)) throw DimensionError("hierarchical_solve: frames disagree");

  std::vector<ScalarField> pyr0{u0};
  std::vector<ScalarField> pyrT{uT};
  for (int l = 1; l <= cfg.pyramid_levels; ++l) {
    const ScalarField& prev = pyr0.back();
    if (prev.width() < 8 || prev.height() < 8) break;  // cannot halve further
    pyr0.push_back(downsample_bicubic(pyr0.back()));
    pyrT.push_back(downsample_bicubic(pyrT.back()));
  }
  const int coarsest = static_cast<int>(pyr0.size()) - 1;

  TimeFlow flow = TimeFlow::zero(pyr0[coarsest].width(), pyr0[coarsest].height(), cfg.horizon,
                                 cfg.n_t, u0.spacing());
  for (int l = coarsest; l >= 0; --l) {
    RunConfig level_cfg = cfg;
    level_cfg.lambda_star = cfg.lambda_star * std::pow(cfg.lambda_level_ratio, coarsest - l);
    LoopResult result = (loop == LoopVariant::kLoopI)
                            ? segregation_loop_i(pyr0[l], pyrT[l], level_cfg, flow)
                            : segregation_loop_ii(pyr0[l], pyrT[l], level_cfg, flow);
    if (reports) {
      LevelReport report;
      report.level = l;
      report.width = pyr0[l].width();
      report.height = pyr0[l].height();
      report.lambda = level_cfg.lambda_star;
      for (const LoopState& s : result.history) {
        report.iterations.push_back(
            {s.iteration, s.terminal_mismatch, s.data_term, s.reg_term});
      }
      reports->push_back(std::move(report));
    }
    flow = std::move(result.flow);
    if (l > 0) {
      std::vector<VectorField> upsampled;
      upsampled.reserve(flow.sample_count());
      for (int k = 0; k < flow.sample_count(); ++k) {
        upsampled.push_back(
            upsample_flow_bicubic(flow.sample(k), pyr0[l - 1].width(), pyr0[l - 1].height()));
      }
      flow = TimeFlow(cfg.horizon, std::move(upsampled));
    }
  }
  return flow;
}

ScalarField transport_frame(const ScalarField& frame, const TimeFlow& flow, double t,
                            const RunConfig& cfg) {
  if (cfg.scheme == TransportScheme::kCharacteristic) {
    return solve_transport_characteristic(frame, flow, t, cfg.dt_ode);
  }
  if (t <= 0.0) return frame;
  const std::vector<double> times{t};
  return std::move(
      solve_transport_tvd(frame, flow, times, CflPolicy{cfg.sigma_cfl}).states.back());
}

ScalarField interpolate_at(const ScalarField& u0, const ScalarField& uT, const TimeFlow& flow_fwd,
                           const TimeFlow& flow_bwd, double t, const RunConfig& cfg) {
  if (t < 0.0 || t > cfg.horizon * (1.0 + 1e-12)) {
    throw Error("interpolate_at: t outside [0, horizon]");
  }
  const ScalarField fwd = transport_frame(u0, flow_fwd, t, cfg);
  const ScalarField bwd = transport_frame(uT, flow_bwd, cfg.horizon - t, cfg);
  return linear_combination(0.5, fwd, 0.5, bwd);
}

}  // namespace ocflow
