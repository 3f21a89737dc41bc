#include "ocflow/resample.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace ocflow {

namespace {

// Catmull-Rom kernel, a = -0.5.
inline std::array<double, 4> catmull_rom_weights(double t) {
  constexpr double a = -0.5;
  const double t2 = t * t;
  const double t3 = t2 * t;
  // taps at offsets -1, 0, +1, +2 relative to floor(x)
  return {
      a * (t3 - 2.0 * t2 + t),
      (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0,
      -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t,
      a * (t2 - t3),
  };
}

inline double bicubic_sample(const double* data, int w, int h, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  const auto wx = catmull_rom_weights(x - i0);
  const auto wy = catmull_rom_weights(y - j0);
  double acc = 0.0;
  for (int dj = -1; dj <= 2; ++dj) {
    const int j = std::clamp(j0 + dj, 0, h - 1);
    double row = 0.0;
    for (int di = -1; di <= 2; ++di) {
      const int i = std::clamp(i0 + di, 0, w - 1);
      row += wx[di + 1] * data[static_cast<std::size_t>(j) * w + i];
    }
    acc += wy[dj + 1] * row;
  }
  return acc;
}

// Natural cubic B-spline prefilter along one line: solves for coefficients
// c[-1..n] (returned as n+2 values) with s(x_i) = f_i and s''(0) = s''(n-1) = 0.
// The end conditions collapse to c_0 = f_0, c_{n-1} = f_{n-1}; the interior is
// a (1 4 1)/6 tridiagonal system.
void spline_prefilter_line(const double* f, int n, double* c, double* scratch) {
  const double f0 = f[0];
  const double fn1 = f[n - 1];
  c[1] = f0;            // c_0
  c[n] = fn1;           // c_{n-1}
  const int m = n - 2;  // unknowns c_1..c_{n-2}
  if (m > 0) {
    // Thomas algorithm on diag 4, off-diag 1.
    double* cp = scratch;      // modified upper diagonal
    double* dp = scratch + m;  // modified rhs
    const auto rhs = [&](int k) {
      // k = 0..m-1 corresponds to spline node k+1
      double r = 6.0 * f[k + 1];
      if (k == 0) r -= f0;
      if (k == m - 1) r -= fn1;
      return r;
    };
    cp[0] = 1.0 / 4.0;
    dp[0] = rhs(0) / 4.0;
    for (int k = 1; k < m; ++k) {
      const double denom = 4.0 - cp[k - 1];
      cp[k] = 1.0 / denom;
      dp[k] = (rhs(k) - dp[k - 1]) / denom;
    }
    c[m + 1] = dp[m - 1];  // c_{n-2}
    for (int k = m - 2; k >= 0; --k) {
      dp[k] -= cp[k] * dp[k + 1];
      c[k + 2] = dp[k];
    }
  }
  // ghost coefficients from the natural end conditions
  c[0] = 2.0 * c[1] - c[2];          // c_{-1}
  c[n + 1] = 2.0 * c[n] - c[n - 1];  // c_n
}

inline std::array<double, 4> bspline_weights(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double omt = 1.0 - t;
  return {
      omt * omt * omt / 6.0,
      (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
      (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
      t3 / 6.0,
  };
}

}  // namespace

double bicubic_at(const ScalarField& f, double x, double y) {
  return bicubic_sample(f.values().data(), f.width(), f.height(), x, y);
}

ScalarField downsample_bicubic(const ScalarField& f) {
  if (f.width() < 8 || f.height() < 8) {
    throw DimensionError("downsample_bicubic: input must be at least 8x8, got " +
                         std::to_string(f.width()) + "x" + std::to_string(f.height()));
  }
  const int ow = (f.width() + 1) / 2;
  const int oh = (f.height() + 1) / 2;
  ScalarField out(ow, oh, 0.0, f.spacing());
  const double* data = f.values().data();
  detail::parallel_chunks(oh, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < ow; ++i) {
        out(i, j) = bicubic_sample(data, f.width(), f.height(), 2.0 * i, 2.0 * j);
      }
    }
  });
  return out;
}

VectorField upsample_flow_bicubic(const VectorField& b, int target_w, int target_h) {
  if ((target_w + 1) / 2 != b.width() || (target_h + 1) / 2 != b.height()) {
    throw DimensionError("upsample_flow_bicubic: target " + std::to_string(target_w) + "x" +
                         std::to_string(target_h) + " is not the next-finer level of " +
                         std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
  const double scale = static_cast<double>(target_w) / b.width();
  VectorField out(target_w, target_h, b.spacing());
  const double* vd = b.v_values().data();
  const double* wd = b.w_values().data();
  detail::parallel_chunks(target_h, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < target_w; ++i) {
        const double x = 0.5 * i;
        const double y = 0.5 * j;
        out.v(i, j) = scale * bicubic_sample(vd, b.width(), b.height(), x, y);
        out.w(i, j) = scale * bicubic_sample(wd, b.width(), b.height(), x, y);
      }
    }
  });
  out.zero_boundary();
  return out;
}

std::pair<double, double> sample_flow_bilinear(const VectorField& b, double x, double y) {
  if (std::isnan(x) || std::isnan(y)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const int w = b.width();
  const int h = b.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int i0 = std::min(static_cast<int>(std::floor(x)), w - 2);
  const int j0 = std::min(static_cast<int>(std::floor(y)), h - 2);
  const double tx = x - i0;
  const double ty = y - j0;
  const auto blend = [&](const std::vector<double>& d) {
    const double* row0 = d.data() + static_cast<std::size_t>(j0) * w + i0;
    const double* row1 = row0 + w;
    return (1.0 - ty) * ((1.0 - tx) * row0[0] + tx * row0[1]) +
           ty * ((1.0 - tx) * row1[0] + tx * row1[1]);
  };
  return {blend(b.v_values()), blend(b.w_values())};
}

SplineInterpolant::SplineInterpolant(const ScalarField& f)
    : width_(f.width()), height_(f.height()), samples_(f.values()) {
  const int w = width_;
  const int h = height_;
  // Row pass: coefficients per image row, (w+2) per line.
  std::vector<double> rows(static_cast<std::size_t>(w + 2) * h);
  std::vector<double> scratch(static_cast<std::size_t>(2) * std::max(w, h));
  for (int j = 0; j < h; ++j) {
    spline_prefilter_line(samples_.data() + static_cast<std::size_t>(j) * w, w,
                          rows.data() + static_cast<std::size_t>(j) * (w + 2), scratch.data());
  }
  // Column pass over the extended rows.
  coef_.assign(static_cast<std::size_t>(w + 2) * (h + 2), 0.0);
  std::vector<double> col(h);
  std::vector<double> ccol(h + 2);
  for (int i = 0; i < w + 2; ++i) {
    for (int j = 0; j < h; ++j) col[j] = rows[static_cast<std::size_t>(j) * (w + 2) + i];
    spline_prefilter_line(col.data(), h, ccol.data(), scratch.data());
    for (int j = 0; j < h + 2; ++j) coef_[static_cast<std::size_t>(j) * (w + 2) + i] = ccol[j];
  }
}

double SplineInterpolant::operator()(double x, double y) const {
  if (std::isnan(x) || std::isnan(y)) return std::numeric_limits<double>::quiet_NaN();
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  if (fx == x && fy == y) {
    // knot values are interpolated exactly; return the stored sample
    return samples_[static_cast<std::size_t>(static_cast<int>(fy)) * width_ +
                    static_cast<int>(fx)];
  }
  const int i0 = std::min(static_cast<int>(fx), width_ - 2);
  const int j0 = std::min(static_cast<int>(fy), height_ - 2);
  const auto wx = bspline_weights(x - i0);
  const auto wy = bspline_weights(y - j0);
  // coefficient (i0 + di - 1, j0 + dj - 1) lives at coef index (+1 shift)
  double acc = 0.0;
  for (int dj = 0; dj < 4; ++dj) {
    const double* row = coef_.data() + static_cast<std::size_t>(j0 + dj) * (width_ + 2) + i0;
    acc += wy[dj] * (wx[0] * row[0] + wx[1] * row[1] + wx[2] * row[2] + wx[3] * row[3]);
  }
  return acc;
}

ScalarField warp(const ScalarField& f, const BacktraceMap& map) {
  if (f.width() != map.width() || f.height() != map.height()) {
    throw DimensionError("warp: field and map dimensions disagree");
  }
  const SplineInterpolant spline(f);
  ScalarField out(f.width(), f.height(), 0.0, f.spacing());
  detail::parallel_chunks(f.height(), [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < f.width(); ++i) {
        out(i, j) = spline(map.x(i, j), map.y(i, j));
      }
    }
  });
  return out;
}

}  // namespace ocflow
