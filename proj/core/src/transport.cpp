#include "ocflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ocflow/resample.hpp"
#include "parallel.hpp"

namespace ocflow {

namespace {

constexpr double kRatioDenomGuard = 1e-12;
constexpr double kRatioSaturation = 1e12;

// Flux difference ratio with the 0/0 guard: a vanishing denominator saturates
// r so that chi(r) caps and chi(r)/r falls back to first-order upwind.
inline double flux_ratio(double num, double den) {
  if (std::abs(den) < kRatioDenomGuard) {
    if (num > 0.0) return kRatioSaturation;
    if (num < 0.0) return -kRatioSaturation;
    return 0.0;
  }
  return num / den;
}

inline double chi_over_r(double r) { return r == 0.0 ? 0.0 : superbee(r) / r; }

}  // namespace

double superbee(double r) {
  return std::max({0.0, std::min(2.0 * r, 1.0), std::min(r, 2.0)});
}

double CflPolicy::dt_for(const VectorField& b) const {
  const double speed = b.max_speed();
  if (speed == 0.0) return std::numeric_limits<double>::infinity();
  return sigma_target * b.spacing() / speed;
}

ScalarField tvd_step(const ScalarField& u, const VectorField& b, double dt) {
  if (u.width() != b.width() || u.height() != b.height()) {
    throw DimensionError("tvd_step: field and flow dimensions disagree");
  }
  const double h = u.spacing();
  const double sigma = b.max_speed() * dt / h;
  if (sigma > 1.0 + 1e-12) {
    throw CflError("tvd_step: CFL number " + std::to_string(sigma) + " exceeds 1", sigma);
  }
  const int W = u.width();
  const int H = u.height();
  ScalarField out(W, H, 0.0, h);
  detail::parallel_chunks(H, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < W; ++i) {
        const double u0 = u(i, j);

        // x sweep
        const double xm2 = u.at_clamped(i - 2, j);
        const double xm1 = u.at_clamped(i - 1, j);
        const double xp1 = u.at_clamped(i + 1, j);
        const double xp2 = u.at_clamped(i + 2, j);
        const double dxm3 = xm1 - xm2;  // u_{i-1} - u_{i-2}
        const double dxm1 = u0 - xm1;   // u_i     - u_{i-1}
        const double dxp1 = xp1 - u0;   // u_{i+1} - u_i
        const double dxp3 = xp2 - xp1;  // u_{i+2} - u_{i+1}
        const double v = b.v(i, j);
        const double vp = std::max(v, 0.0);
        const double vm = std::min(v, 0.0);
        double term_x = 0.0;
        if (vp != 0.0) {
          const double rp_half = flux_ratio(dxp1, dxm1);
          const double rp_3half = flux_ratio(dxm1, dxm3);
          term_x += vp / h * (1.0 + 0.5 * superbee(rp_half) - 0.5 * chi_over_r(rp_3half)) * (-dxm1);
        }
        if (vm != 0.0) {
          const double rm_half = flux_ratio(dxm1, dxp1);
          const double rm_3half = flux_ratio(dxp1, dxp3);
          term_x -= vm / h * (1.0 + 0.5 * superbee(rm_half) - 0.5 * chi_over_r(rm_3half)) * dxp1;
        }

        // y sweep
        const double ym2 = u.at_clamped(i, j - 2);
        const double ym1 = u.at_clamped(i, j - 1);
        const double yp1 = u.at_clamped(i, j + 1);
        const double yp2 = u.at_clamped(i, j + 2);
        const double dym3 = ym1 - ym2;
        const double dym1 = u0 - ym1;
        const double dyp1 = yp1 - u0;
        const double dyp3 = yp2 - yp1;
        const double w = b.w(i, j);
        const double wp = std::max(w, 0.0);
        const double wm = std::min(w, 0.0);
        double term_y = 0.0;
        if (wp != 0.0) {
          const double rp_half = flux_ratio(dyp1, dym1);
          const double rp_3half = flux_ratio(dym1, dym3);
          term_y += wp / h * (1.0 + 0.5 * superbee(rp_half) - 0.5 * chi_over_r(rp_3half)) * (-dym1);
        }
        if (wm != 0.0) {
          const double rm_half = flux_ratio(dym1, dyp1);
          const double rm_3half = flux_ratio(dyp1, dyp3);
          term_y -= wm / h * (1.0 + 0.5 * superbee(rm_half) - 0.5 * chi_over_r(rm_3half)) * dyp1;
        }

        out(i, j) = u0 + dt * (term_x + term_y);
      }
    }
  });
  return out;
}

namespace {

void check_sample_times(std::span<const double> times, double horizon) {
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (t < prev) throw Error("transport: sample times must be sorted ascending");
    if (t < 0.0 || t > horizon * (1.0 + 1e-12)) {
      throw Error("transport: sample time " + std::to_string(t) + " outside [0, " +
                  std::to_string(horizon) + "]");
    }
    prev = t;
  }
}

// March from t_from to t_to (one flow slot; the slot sample governs the whole
// span) with steps of the policy width, shortening the last step.
ScalarField march_span(ScalarField u, const VectorField& sample, double t_from, double t_to,
                       const CflPolicy& policy) {
  const double span = t_to - t_from;
  if (span <= 0.0) return u;
  const double dt = policy.dt_for(sample);
  if (!std::isfinite(dt)) {
    return tvd_step(u, sample, span);  // zero flow, single trivial step
  }
  const auto n_full = static_cast<long>(std::floor(span / dt + 1e-12));
  for (long s = 0; s < n_full; ++s) u = tvd_step(u, sample, dt);
  const double rem = span - static_cast<double>(n_full) * dt;
  if (rem > 1e-12 * std::max(span, dt)) u = tvd_step(u, sample, rem);
  return u;
}

}  // namespace

TransportTrajectory solve_transport_tvd(const ScalarField& u0, const TimeFlow& flow,
                                        std::span<const double> sample_times,
                                        const CflPolicy& policy) {
  if (u0.width() != flow.width() || u0.height() != flow.height()) {
    throw DimensionError("solve_transport_tvd: field and flow dimensions disagree");
  }
  check_sample_times(sample_times, flow.horizon());
  TransportTrajectory traj;
  traj.times.assign(sample_times.begin(), sample_times.end());
  traj.states.reserve(sample_times.size());

  ScalarField u = u0;
  double t = 0.0;
  const double slot = flow.slot_duration();
  for (double target : sample_times) {
    while (target - t > 1e-12 * std::max(1.0, flow.horizon())) {
      const int k = flow.sample_index(t);
      const double bound = std::min(target, (k + 1) * slot);
      u = march_span(std::move(u), flow.sample(k), t, bound, policy);
      t = bound;
    }
    t = target;
    traj.states.push_back(u);
  }
  return traj;
}

TimeFlow time_reversed(const TimeFlow& flow) {
  const int n = flow.sample_count();
  std::vector<VectorField> rev;
  rev.reserve(n);
  for (int k = n - 1; k >= 0; --k) {
    VectorField s = flow.sample(k);
    s *= -1.0;
    rev.push_back(std::move(s));
  }
  return TimeFlow(flow.horizon(), std::move(rev));
}

TransportTrajectory solve_transport_backward(const ScalarField& pT, const TimeFlow& flow,
                                             std::span<const double> sample_times,
                                             const CflPolicy& policy) {
  check_sample_times(sample_times, flow.horizon());
  const double T = flow.horizon();
  std::vector<double> reversed_times(sample_times.size());
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    reversed_times[k] = std::max(0.0, T - sample_times[sample_times.size() - 1 - k]);
  }
  TransportTrajectory rev = solve_transport_tvd(pT, time_reversed(flow), reversed_times, policy);
  TransportTrajectory traj;
  traj.times.assign(sample_times.begin(), sample_times.end());
  traj.states.resize(rev.states.size());
  for (std::size_t k = 0; k < rev.states.size(); ++k) {
    traj.states[k] = std::move(rev.states[rev.states.size() - 1 - k]);
  }
  return traj;
}

BacktraceMap backtrace_rk4(const TimeFlow& flow, double t, double dt_ode) {
  if (t < 0.0 || t > flow.horizon() * (1.0 + 1e-12)) {
    throw Error("backtrace_rk4: t outside [0, horizon]");
  }
  if (dt_ode <= 0.0) throw Error("backtrace_rk4: dt_ode must be positive");
  const int W = flow.width();
  const int H = flow.height();
  const double xmax = W - 1;
  const double ymax = H - 1;
  const double slot = flow.slot_duration();
  const int n_samples = flow.sample_count();
  BacktraceMap map(W, H);
  detail::parallel_chunks(H, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < W; ++i) {
        double x = i;
        double y = j;
        double s = t;
        while (s > 1e-12 * std::max(1.0, t)) {
          // sample index of the interval (k*slot, (k+1)*slot] just below s
          const int k = std::clamp(static_cast<int>(std::ceil(s / slot)) - 1, 0, n_samples - 1);
          const VectorField& b = flow.sample(k);
          double h = std::min(dt_ode, s);
          if (k > 0) h = std::min(h, s - k * slot);
          if (h <= 0.0) break;
          const auto [k1x, k1y] = sample_flow_bilinear(b, x, y);
          const auto [k2x, k2y] =
              sample_flow_bilinear(b, x - 0.5 * h * k1x, y - 0.5 * h * k1y);
          const auto [k3x, k3y] =
              sample_flow_bilinear(b, x - 0.5 * h * k2x, y - 0.5 * h * k2y);
          const auto [k4x, k4y] = sample_flow_bilinear(b, x - h * k3x, y - h * k3y);
          x -= h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
          y -= h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
          x = std::clamp(x, 0.0, xmax);
          y = std::clamp(y, 0.0, ymax);
          s -= h;
        }
        map.x(i, j) = x;
        map.y(i, j) = y;
      }
    }
  });
  return map;
}

ScalarField solve_transport_characteristic(const ScalarField& u0, const TimeFlow& flow, double t,
                                           double dt_ode) {
  if (u0.width() != flow.width() || u0.height() != flow.height()) {
    throw DimensionError("solve_transport_characteristic: dimensions disagree");
  }
  if (t <= 0.0) return u0;
  return warp(u0, backtrace_rk4(flow, t, dt_ode));
}

ScalarField solve_backward_characteristic(const ScalarField& terminal, const TimeFlow& flow,
                                          double t, double dt_ode) {
  return solve_transport_characteristic(terminal, time_reversed(flow), flow.horizon() - t,
                                        dt_ode);
}

}  // namespace ocflow
