#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "vfi/beamform.hpp"
#include "vfi/errors.hpp"
#include "vfi/field.hpp"

namespace vfi {

struct FrequencyEstimate {
  double f_hz = 0.0;
  double quality = 0.0;  // |R(1)| / sum |s|^2 over the lag support
};

// Left/right slow-time frequencies observed at one receive angle.
struct FrequencyPair {
  double f_left_hz = 0.0;
  double f_right_hz = 0.0;
  double alpha_deg = 0.0;
  double quality = 0.0;
};

struct VelocityEstimate {
  double vx = 0.0;
  double vz = 0.0;
  EstMethod method = EstMethod::None;
  double quality = 0.0;
};

// Lag-one autocorrelation (Kasai) frequency estimate of a slow-time signal.
inline FrequencyEstimate kasai_frequency(std::span<const cdouble> s, double f_prf) {
  if (s.size() < 2) throw ValidationError("kasai_frequency: need at least 2 samples");
  cdouble r1{0.0, 0.0};
  double denom = 0.0;
  for (size_t k = 0; k + 1 < s.size(); ++k) {
    r1 += std::conj(s[k]) * s[k + 1];
    denom += std::norm(s[k]);
  }
  FrequencyEstimate out;
  if (denom == 0.0) return out;  // all-zero input
  out.f_hz = f_prf / (2.0 * std::numbers::pi) * std::atan2(r1.imag(), r1.real());
  out.quality = std::min(1.0, std::abs(r1) / denom);
  return out;
}

// Velocity components from the left/right Doppler frequencies of a
// symmetric receive-angle pair:
//   vx = (f_L - f_R)/sin(a) * c/(2 f0)
//   vz = (f_L + f_R)/(1 + cos(a)) * c/(2 f0)
inline void triangulate(double f_left_hz, double f_right_hz, double alpha_rad,
                        double c, double f0, double* vx, double* vz) {
  if (!(alpha_rad > 0.0) || !(alpha_rad < 0.5 * std::numbers::pi))
    throw ValidationError("triangulate: alpha must lie in (0, pi/2)");
  const double scale = c / (2.0 * f0);
  *vx = (f_left_hz - f_right_hz) / std::sin(alpha_rad) * scale;
  *vz = (f_left_hz + f_right_hz) / (1.0 + std::cos(alpha_rad)) * scale;
}

// Forward model of the pair frequencies for a known velocity (used for
// round-trip checks and synthetic inputs).
inline void triangulate_forward(double vx, double vz, double alpha_rad, double c, double f0,
                                double* f_left_hz, double* f_right_hz) {
  const double s = std::sin(alpha_rad);
  const double cc = 1.0 + std::cos(alpha_rad);
  *f_left_hz = (vx * s + vz * cc) * f0 / c;
  *f_right_hz = (-vx * s + vz * cc) * f0 / c;
}

// Quality-weighted least squares over the angle set. The model is linear and
// decoupled: f_L - f_R depends only on vx, f_L + f_R only on vz. Pairs below
// the quality threshold are dropped; no usable pair -> nullopt.
inline std::optional<VelocityEstimate> stdmr_estimate(std::span<const FrequencyPair> pairs,
                                                      double c, double f0,
                                                      double quality_threshold = 0.3) {
  double num_x = 0.0, den_x = 0.0, num_z = 0.0, den_z = 0.0;
  double qsum = 0.0;
  int used = 0;
  for (const auto& p : pairs) {
    if (p.quality < quality_threshold) continue;
    const double a = p.alpha_deg * std::numbers::pi / 180.0;
    const double sx = std::sin(a) * 2.0 * f0 / c;
    const double sz = (1.0 + std::cos(a)) * 2.0 * f0 / c;
    const double w = p.quality;
    num_x += w * (p.f_left_hz - p.f_right_hz) * sx;
    den_x += w * sx * sx;
    num_z += w * (p.f_left_hz + p.f_right_hz) * sz;
    den_z += w * sz * sz;
    qsum += p.quality;
    ++used;
  }
  if (used == 0) return std::nullopt;
  VelocityEstimate est;
  est.vx = den_x > 0.0 ? num_x / den_x : 0.0;
  est.vz = den_z > 0.0 ? num_z / den_z : 0.0;
  est.method = EstMethod::Triangulation;
  est.quality = qsum / used;
  return est;
}

namespace detail {

// Normalized cross-correlation Re<a0, b0 shifted> over integer lags in
// [-max_lag, max_lag]; both lines are de-meaned. Positive lag means b is a
// right-shifted copy of a. Throws on zero-variance input.
template <typename T>
inline std::vector<double> xcorr_normalized(std::span<const T> a, std::span<const T> b,
                                            int max_lag) {
  const int n = static_cast<int>(a.size());
  if (b.size() != a.size())
    throw ValidationError("xcorr: lines must have equal length");
  if (n < 2 * max_lag + 8)
    throw ValidationError("xcorr: lines too short for the requested max_lag");
  T mean_a{}, mean_b{};
  for (int i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  std::vector<T> a0(a.begin(), a.end()), b0(b.begin(), b.end());
  for (auto& v : a0) v -= mean_a;
  for (auto& v : b0) v -= mean_b;

  auto sqnorm = [](const T& v) {
    if constexpr (std::is_same_v<T, cdouble>) return std::norm(v);
    else return v * v;
  };
  auto cross = [](const T& x, const T& y) {
    if constexpr (std::is_same_v<T, cdouble>) return (std::conj(x) * y).real();
    else return x * y;
  };

  double var_a = 0.0, var_b = 0.0;
  for (int i = 0; i < n; ++i) {
    var_a += sqnorm(a0[static_cast<size_t>(i)]);
    var_b += sqnorm(b0[static_cast<size_t>(i)]);
  }
  if (var_a <= 0.0 || var_b <= 0.0)
    throw NumericalError("xcorr: flat signal (zero variance)");

  std::vector<double> rho(static_cast<size_t>(2 * max_lag + 1), 0.0);
  for (int l = -max_lag; l <= max_lag; ++l) {
    double num = 0.0, na = 0.0, nb = 0.0;
    const int lo = std::max(0, -l);
    const int hi = std::min(n, n - l);
    for (int i = lo; i < hi; ++i) {
      num += cross(a0[static_cast<size_t>(i)], b0[static_cast<size_t>(i + l)]);
      na += sqnorm(a0[static_cast<size_t>(i)]);
      nb += sqnorm(b0[static_cast<size_t>(i + l)]);
    }
    const double d = std::sqrt(na * nb);
    rho[static_cast<size_t>(l + max_lag)] = d > 0.0 ? num / d : 0.0;
  }
  return rho;
}

// Peak of a sampled correlation function refined by 3-point parabolic
// interpolation. Returns {lag, peak value}.
inline std::pair<double, double> refine_peak(const std::vector<double>& rho, int max_lag) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(rho.size()); ++i)
    if (rho[static_cast<size_t>(i)] > rho[static_cast<size_t>(best)]) best = i;
  double lag = static_cast<double>(best - max_lag);
  double peak = rho[static_cast<size_t>(best)];
  if (best > 0 && best + 1 < static_cast<int>(rho.size())) {
    const double ym = rho[static_cast<size_t>(best - 1)];
    const double y0 = rho[static_cast<size_t>(best)];
    const double yp = rho[static_cast<size_t>(best + 1)];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) {
      const double delta = 0.5 * (ym - yp) / denom;
      if (std::abs(delta) <= 1.0) {
        lag += delta;
        peak = y0 - 0.25 * (ym - yp) * delta;
      }
    }
  }
  return {lag, peak};
}

}  // namespace detail

struct LagEstimate {
  double lag_samples = 0.0;
  double quality = 0.0;  // peak correlation coefficient clamped to [0, 1]
};

// Sub-sample displacement of line b relative to line a.
template <typename T>
inline LagEstimate xcorr_lag(std::span<const T> a, std::span<const T> b, int max_lag) {
  const auto rho = detail::xcorr_normalized(a, b, max_lag);
  const auto [lag, peak] = detail::refine_peak(rho, max_lag);
  return {lag, std::clamp(peak, 0.0, 1.0)};
}

inline LagEstimate xcorr_lag(const std::vector<double>& a, const std::vector<double>& b,
                             int max_lag) {
  return xcorr_lag(std::span<const double>(a), std::span<const double>(b), max_lag);
}

inline LagEstimate xcorr_lag(const std::vector<cdouble>& a, const std::vector<cdouble>& b,
                             int max_lag) {
  return xcorr_lag(std::span<const cdouble>(a), std::span<const cdouble>(b), max_lag);
}

struct DirectionalProfile {
  std::vector<double> depths_m;
  std::vector<VelocityEstimate> estimate;  // per depth
  std::vector<uint8_t> valid;
};

// Transverse velocity per depth: correlation functions of consecutive frame
// pairs are averaged before peak finding; vz = 0 by the transverse-flow
// assumption.
inline DirectionalProfile directional_velocity(const BeamformedEnsemble& lines,
                                               double f_prf, int max_lag) {
  if (lines.branch != Branch::DirectionalLine)
    throw ValidationError("directional_velocity: expected a DirectionalLine ensemble");
  if (lines.frames < 2)
    throw ValidationError("directional_velocity: need at least 2 frames");
  DirectionalProfile out;
  out.depths_m = lines.line_depths_m;
  const int nd = static_cast<int>(lines.line_depths_m.size());
  out.estimate.assign(static_cast<size_t>(nd), VelocityEstimate{});
  out.valid.assign(static_cast<size_t>(nd), 0);

  for (int d = 0; d < nd; ++d) {
    std::vector<double> rho_sum(static_cast<size_t>(2 * max_lag + 1), 0.0);
    int pairs = 0;
    for (int k = 0; k + 1 < lines.frames; ++k) {
      std::span<const cdouble> a(&lines.values[static_cast<size_t>(k) * lines.n_samples +
                                               static_cast<size_t>(d) * lines.line_nx],
                                 static_cast<size_t>(lines.line_nx));
      std::span<const cdouble> b(&lines.values[static_cast<size_t>(k + 1) * lines.n_samples +
                                               static_cast<size_t>(d) * lines.line_nx],
                                 static_cast<size_t>(lines.line_nx));
      try {
        const auto rho = detail::xcorr_normalized(a, b, max_lag);
        for (size_t i = 0; i < rho.size(); ++i) rho_sum[i] += rho[i];
        ++pairs;
      } catch (const NumericalError&) {
        // flat pair, skip
      }
    }
    if (pairs == 0) continue;
    for (auto& v : rho_sum) v /= pairs;
    const auto [lag, peak] = detail::refine_peak(rho_sum, max_lag);
    VelocityEstimate est;
    est.vx = lag * lines.line_spacing_m * f_prf;
    est.vz = 0.0;
    est.method = EstMethod::DirectionalXCorr;
    est.quality = std::clamp(peak, 0.0, 1.0);
    out.estimate[static_cast<size_t>(d)] = est;
    out.valid[static_cast<size_t>(d)] = 1;
  }
  return out;
}

}  // namespace vfi
