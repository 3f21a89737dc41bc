#include <doctest.h>

#include <cmath>
#include <vector>

#include "ocflow/metrics.hpp"
#include "ocflow/transport.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ocflow;
using namespace ocflow::testing;

TEST_CASE("superbee limiter closed form") {
  CHECK(superbee(1.0) == 1.0);
  CHECK(superbee(0.25) == 0.5);
  CHECK(superbee(2.0) == 2.0);
  CHECK(superbee(-1.0) == 0.0);
  CHECK(superbee(0.75) == 1.0);
  CHECK(superbee(1.5) == 1.5);
  CHECK(superbee(0.0) == 0.0);
  CHECK(superbee(3.0) == 2.0);
  CHECK(superbee(0.5) == 1.0);
}

TEST_CASE("tvd step is exact for zero flow and constant fields") {
  const ScalarField u = random_field(16, 12, 1u);
  VectorField zero(16, 12);
  const ScalarField u1 = tvd_step(u, zero, 0.7);
  CHECK(max_abs_diff(u, u1) == 0.0);

  ScalarField c(16, 12, 9.5);
  const VectorField b = random_flow(16, 12, 2u, 2.0);
  const CflPolicy policy;
  const ScalarField c1 = tvd_step(c, b, policy.dt_for(b));
  CHECK(max_abs_diff(c, c1) == 0.0);
}

TEST_CASE("tvd step rejects CFL violations") {
  ScalarField u(8, 8, 1.0);
  VectorField b(8, 8);
  for (double& x : b.v_values()) x = 2.0;
  CHECK_THROWS_AS(tvd_step(u, b, 0.6), CflError);
  CHECK_NOTHROW(tvd_step(u, b, 0.5));
}

TEST_CASE("tvd advection of a 1D step matches translation with small L1 error") {
  const int W = 64;
  const int H = 8;
  ScalarField u(W, H, 0.0);
  for (int j = 0; j < H; ++j) {
    for (int i = 0; i < W; ++i) u(i, j) = i < 32 ? 1.0 : 0.0;
  }
  VectorField b(W, H);
  for (double& x : b.v_values()) x = 1.0;
  const double dt = 0.1;  // sigma = 0.1 at unit speed
  const std::vector<double> init_tv = [&] {
    std::vector<double> tv(H);
    for (int j = 0; j < H; ++j) tv[j] = row_tv(u, j);
    return tv;
  }();
  ScalarField cur = u;
  for (int s = 0; s < 80; ++s) {
    cur = tvd_step(cur, b, dt);
    for (int j = 0; j < H; ++j) CHECK(row_tv(cur, j) <= init_tv[j] + 1e-12);
  }
  // exact solution: the step translated by v t = 8 cells
  for (int j = 0; j < H; ++j) {
    double l1 = 0.0;
    for (int i = 0; i < W; ++i) l1 += std::abs(cur(i, j) - (i < 40 ? 1.0 : 0.0));
    CHECK(l1 < 1.0);
  }
}

TEST_CASE("tvd solver: zero flow, trivial trajectory, exact time landing") {
  const ScalarField u0 = random_field(12, 12, 3u);
  const TimeFlow zero = TimeFlow::zero(12, 12, 2.0);
  const std::vector<double> times{0.0, 0.7, 2.0};
  const TransportTrajectory traj = solve_transport_tvd(u0, zero, times);
  REQUIRE(traj.states.size() == 3);
  for (const ScalarField& s : traj.states) CHECK(max_abs_diff(s, u0) == 0.0);

  const std::vector<double> only_zero{0.0};
  const TransportTrajectory tz = solve_transport_tvd(u0, zero, only_zero);
  REQUIRE(tz.states.size() == 1);
  CHECK(max_abs_diff(tz.states[0], u0) == 0.0);
}

TEST_CASE("tvd solver shortens the final substep to land on sample times") {
  const ScalarField u0 = gaussian_blob(32, 16, 12.0, 8.0, 3.0);
  const TimeFlow flow = uniform_flow(32, 16, 1.0, 0.0, 1.0);
  const std::vector<double> times{0.35};
  const TransportTrajectory traj = solve_transport_tvd(u0, flow, times);

  // manual march: three full steps of 0.1 and a shortened 0.05
  ScalarField manual = u0;
  const VectorField& b = flow.sample(0);
  for (int s = 0; s < 3; ++s) manual = tvd_step(manual, b, 0.1);
  manual = tvd_step(manual, b, 0.35 - 0.3);
  CHECK(max_abs_diff(traj.states[0], manual) <= 1e-12);
}

TEST_CASE("tvd solver translates a smooth blob to 2% accuracy") {
  const int W = 64;
  const int H = 32;
  const ScalarField u0 = gaussian_blob(W, H, 24.0, 16.0, 6.0);
  const TimeFlow flow = uniform_flow(W, H, 1.0, 0.0, 4.0);
  const std::vector<double> times{4.0};
  const TransportTrajectory traj = solve_transport_tvd(u0, flow, times);
  const ScalarField exact = gaussian_blob(W, H, 28.0, 16.0, 6.0);
  const double err = l2_diff(traj.states[0], exact);
  const double norm = std::sqrt([&] {
    double acc = 0.0;
    for (double x : u0.values()) acc += x * x;
    return acc;
  }());
  CHECK(err < 0.02 * norm);
}

TEST_CASE("backward tvd solve matches the forward solve with negated flow") {
  const ScalarField pT = gaussian_blob(48, 24, 24.0, 12.0, 4.0);
  const TimeFlow flow = uniform_flow(48, 24, 1.0, 0.0, 3.0);

  const std::vector<double> times{0.0};
  const TransportTrajectory bwd = solve_transport_backward(pT, flow, times);

  TimeFlow neg = uniform_flow(48, 24, -1.0, 0.0, 3.0);
  const std::vector<double> fwd_times{3.0};
  const TransportTrajectory fwd = solve_transport_tvd(pT, neg, fwd_times);
  CHECK(max_abs_diff(bwd.states[0], fwd.states[0]) <= 1e-12);

  const TimeFlow zero = TimeFlow::zero(48, 24, 3.0);
  const std::vector<double> all{0.0, 1.5, 3.0};
  const TransportTrajectory still = solve_transport_backward(pT, zero, all);
  for (const ScalarField& s : still.states) CHECK(max_abs_diff(s, pT) == 0.0);
}

TEST_CASE("forward-then-backward round trip returns the initial state within 5%") {
  const int n = 48;
  const ScalarField u0 = gaussian_blob(n, n, 22.0, 26.0, 5.0);
  VectorField swirl(n, n);
  const double c = (n - 1) / 2.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      swirl.v(i, j) = -0.08 * (j - c);
      swirl.w(i, j) = 0.08 * (i - c);
    }
  }
  swirl.zero_boundary();
  const TimeFlow flow(1.0, {swirl});
  const std::vector<double> tT{1.0};
  const ScalarField uT = solve_transport_tvd(u0, flow, tT).states[0];
  const std::vector<double> t0{0.0};
  const ScalarField back = solve_transport_backward(uT, flow, t0).states[0];
  const double norm = l2_diff(u0, ScalarField(n, n, 0.0));
  CHECK(l2_diff(back, u0) < 0.05 * norm);
}

TEST_CASE("rk4 backtrace: identity for zero flow, exact translation for constant flow") {
  const TimeFlow zero = TimeFlow::zero(16, 16, 6.0);
  const BacktraceMap id = backtrace_rk4(zero, 6.0);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 16; ++i) {
      CHECK(id.x(i, j) == static_cast<double>(i));
      CHECK(id.y(i, j) == static_cast<double>(j));
    }
  }

  const TimeFlow flow = uniform_flow(16, 16, 1.0, 0.0, 6.0);
  const BacktraceMap m = backtrace_rk4(flow, 5.0);
  for (int j = 0; j < 16; ++j) {
    for (int i = 5; i < 16; ++i) {
      CHECK(m.x(i, j) == doctest::Approx(i - 5.0).epsilon(1e-12));
      CHECK(m.y(i, j) == doctest::Approx(static_cast<double>(j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rk4 backtrace converges at fourth order on a rigid rotation") {
  const int n = 65;
  const double c = (n - 1) / 2.0;
  const double omega = M_PI / 2.0;
  const TimeFlow flow(1.0, {rotation_flow(n, omega)});

  const auto max_err = [&](double dt) {
    const BacktraceMap m = backtrace_rk4(flow, 1.0, dt);
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (std::hypot(i - c, j - c) > c - 6.0) continue;
        // footpoint of the counterclockwise rotation: rotate by -omega t
        const double ca = std::cos(omega);
        const double sa = std::sin(omega);
        const double ex = c + ca * (i - c) + sa * (j - c);
        const double ey = c - sa * (i - c) + ca * (j - c);
        worst = std::max(worst, std::hypot(m.x(i, j) - ex, m.y(i, j) - ey));
      }
    }
    return worst;
  };
  const double e1 = max_err(0.2);
  const double e2 = max_err(0.1);
  const double e3 = max_err(0.05);
  const double order12 = std::log2(e1 / e2);
  const double order23 = std::log2(e2 / e3);
  CHECK(order12 > 3.7);
  CHECK(order12 < 4.3);
  CHECK(order23 > 3.7);
  CHECK(order23 < 4.3);
  // halving dt cuts the error by about 16x
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.35));
}

TEST_CASE("characteristic solver: t = 0 identity and accurate translation") {
  const ScalarField u0 = gaussian_blob(64, 32, 24.0, 16.0, 6.0);
  const TimeFlow flow = uniform_flow(64, 32, 1.0, 0.0, 4.0);
  const ScalarField at0 = solve_transport_characteristic(u0, flow, 0.0);
  CHECK(max_abs_diff(at0, u0) == 0.0);

  const double t = 3.3;
  const ScalarField moved = solve_transport_characteristic(u0, flow, t);
  const ScalarField exact = gaussian_blob(64, 32, 24.0 + t, 16.0, 6.0);
  double norm = 0.0;
  for (double x : u0.values()) norm += x * x;
  CHECK(l2_diff(moved, exact) < 0.01 * std::sqrt(norm));
}

TEST_CASE("characteristic and tvd solvers agree on smooth data within 5%") {
  const int n = 48;
  const ScalarField u0 = gaussian_blob(n, n, 20.0, 24.0, 5.0);
  VectorField swirl(n, n);
  const double c = (n - 1) / 2.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      swirl.v(i, j) = -0.1 * (j - c);
      swirl.w(i, j) = 0.1 * (i - c);
    }
  }
  swirl.zero_boundary();
  const TimeFlow flow(1.0, {swirl});
  const std::vector<double> tT{1.0};
  const ScalarField a = solve_transport_tvd(u0, flow, tT).states[0];
  const ScalarField b = solve_transport_characteristic(u0, flow, 1.0);
  double norm = 0.0;
  for (double x : u0.values()) norm += x * x;
  CHECK(l2_diff(a, b) < 0.05 * std::sqrt(norm));
}

TEST_CASE("tvd property: random monotone rows keep non-increasing variation") {
  std::mt19937 rng(77u);
  std::uniform_real_distribution<double> jump(0.0, 10.0);
  std::uniform_real_distribution<double> speed(0.2, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int W = 48;
    ScalarField u(W, 4, 0.0);
    double level = jump(rng);
    const bool increasing = trial % 2 == 0;
    for (int i = 0; i < W; ++i) {
      level += (increasing ? 1.0 : -1.0) * jump(rng) * 0.2;
      for (int j = 0; j < 4; ++j) u(i, j) = level;
    }
    VectorField b(W, 4);
    const double v = (trial % 3 == 0 ? -1.0 : 1.0) * speed(rng);
    for (double& x : b.v_values()) x = v;
    const CflPolicy policy;
    const double dt = policy.dt_for(b);
    for (int s = 0; s < 20; ++s) {
      const double before = row_tv(u, 0);
      u = tvd_step(u, b, dt);
      const double after = row_tv(u, 0);
      CHECK(after <= before + 1e-12);
    }
  }
}

TEST_CASE("maximum principle on monotone 1D data for the tvd scheme") {
  ScalarField u(32, 4, 0.0);
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 4; ++j) u(i, j) = i < 10 ? 2.0 : (i < 20 ? 5.0 : 7.0);
  }
  VectorField b(32, 4);
  for (double& x : b.v_values()) x = 0.8;
  const CflPolicy policy;
  const double dt = policy.dt_for(b);
  ScalarField cur = u;
  for (int s = 0; s < 40; ++s) {
    cur = tvd_step(cur, b, dt);
    for (double x : cur.values()) {
      CHECK(x >= 2.0);
      CHECK(x <= 7.0);
    }
  }
}

TEST_CASE("rigid-rotation tvd advection conserves mass per step") {
  const int n = 48;
  const VectorField rot = rotation_flow(n, 0.05);
  const ScalarField u = disk_image(n, (n - 1) / 2.0, (n - 1) / 2.0, 8.0);
  const CflPolicy policy;
  const double dt = policy.dt_for(rot);
  ScalarField cur = u;
  const double m0 = mass(u);
  for (int s = 0; s < 10; ++s) {
    const ScalarField next = tvd_step(cur, rot, dt);
    CHECK(std::abs(mass(next) - mass(cur)) / std::abs(m0) < 1e-6);
    cur = next;
  }
}

TEST_CASE("characteristic solver is linear in the initial state") {
  const int n = 32;
  const ScalarField u1 = gaussian_blob(n, n, 12.0, 14.0, 4.0);
  const ScalarField u2 = random_field(n, n, 91u, 0.0, 50.0);
  VectorField swirl(n, n);
  const double c = (n - 1) / 2.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      swirl.v(i, j) = -0.07 * (j - c);
      swirl.w(i, j) = 0.07 * (i - c);
    }
  }
  swirl.zero_boundary();
  const TimeFlow flow(1.0, {swirl});

  const double alpha = 1.7;
  const double beta = -0.6;
  const ScalarField combo = linear_combination(alpha, u1, beta, u2);
  const ScalarField lhs = solve_transport_characteristic(combo, flow, 1.0);
  const ScalarField s1 = solve_transport_characteristic(u1, flow, 1.0);
  const ScalarField s2 = solve_transport_characteristic(u2, flow, 1.0);
  const ScalarField rhs = linear_combination(alpha, s1, beta, s2);
  CHECK(max_abs_diff(lhs, rhs) <= 1e-10);
}

TEST_CASE("tvd scheme is positively homogeneous (the limiter bars full linearity)") {
  // flux ratios are scale invariant, so u -> alpha u with alpha > 0 commutes
  // with the step; alpha = 2 keeps every branch decision identical
  const int n = 24;
  ScalarField u = random_field(n, n, 92u, 1.0, 100.0);
  // keep differences away from the 1e-12 ratio guard
  for (double& x : u.values()) x = std::round(x * 1e6) / 1e6;
  const VectorField b = random_flow(n, n, 93u, 1.5);
  const CflPolicy policy;
  const double dt = policy.dt_for(b);

  ScalarField u2 = u;
  for (double& x : u2.values()) x *= 2.0;
  const ScalarField step1 = tvd_step(u, b, dt);
  const ScalarField step2 = tvd_step(u2, b, dt);
  double worst = 0.0;
  for (std::size_t k = 0; k < step1.size(); ++k) {
    worst = std::max(worst, std::abs(step2.values()[k] - 2.0 * step1.values()[k]));
  }
  CHECK(worst <= 1e-10);
}
