#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "vfi/errors.hpp"

namespace vfi {

using cdouble = std::complex<double>;

namespace detail {

struct Biquad {
  // y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
  double b0, b1, b2, a1, a2;
};

// Butterworth low-pass of even order as a biquad cascade (bilinear transform
// with prewarped cutoff).
inline std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  if (order < 2 || order % 2 != 0)
    throw ValidationError("butterworth_lowpass: order must be even and >= 2");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * fs_hz))
    throw ValidationError("butterworth_lowpass: cutoff must lie in (0, fs/2)");
  const double K = 1.0 / std::tan(std::numbers::pi * cutoff_hz / fs_hz);
  std::vector<Biquad> sections;
  const int n_sections = order / 2;
  for (int k = 1; k <= n_sections; ++k) {
    const double gamma = std::numbers::pi * (2.0 * k - 1.0) / (2.0 * order);
    const double a1s = 2.0 * std::sin(gamma);  // s^2 + a1s*s + 1
    const double d0 = K * K + a1s * K + 1.0;
    Biquad q;
    q.b0 = 1.0 / d0;
    q.b1 = 2.0 / d0;
    q.b2 = 1.0 / d0;
    q.a1 = 2.0 * (1.0 - K * K) / d0;
    q.a2 = (K * K - a1s * K + 1.0) / d0;
    sections.push_back(q);
  }
  return sections;
}

template <typename T>
inline void filter_in_place(const std::vector<Biquad>& sections, std::vector<T>& x) {
  for (const auto& q : sections) {
    T x1{}, x2{}, y1{}, y2{};
    for (auto& v : x) {
      const T xn = v;
      const T yn = q.b0 * xn + q.b1 * x1 + q.b2 * x2 - q.a1 * y1 - q.a2 * y2;
      x2 = x1;
      x1 = xn;
      y2 = y1;
      y1 = yn;
      v = yn;
    }
  }
}

}  // namespace detail

// Zero-phase filtering: forward-backward pass of the biquad cascade with
// odd-reflection edge padding to suppress startup transients.
template <typename T>
inline std::vector<T> filtfilt(const std::vector<detail::Biquad>& sections,
                               const std::vector<T>& x) {
  if (x.empty()) return {};
  const size_t n = x.size();
  const size_t pad = std::min<size_t>(n - 1, 96);
  std::vector<T> ext;
  ext.reserve(n + 2 * pad);
  for (size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[0] - x[pad - i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

  detail::filter_in_place(sections, ext);
  std::reverse(ext.begin(), ext.end());
  detail::filter_in_place(sections, ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<T>(ext.begin() + static_cast<long>(pad),
                        ext.begin() + static_cast<long>(pad + n));
}

// Complex envelope referenced to f0: mix down by exp(-i 2 pi f0 t), 6th-order
// zero-phase Butterworth low-pass at f0, scale by 2 to preserve amplitude.
inline std::vector<cdouble> to_baseband(const std::vector<double>& rf, double f0, double fs) {
  if (!(fs > 2.0 * f0)) throw ValidationError("to_baseband: require fs > 2*f0");
  if (rf.empty()) return {};
  const double w = 2.0 * std::numbers::pi * f0 / fs;
  std::vector<cdouble> mixed(rf.size());
  for (size_t n = 0; n < rf.size(); ++n)
    mixed[n] = rf[n] * std::polar(1.0, -w * static_cast<double>(n));
  const auto lp = detail::butterworth_lowpass(6, f0, fs);
  auto bb = filtfilt(lp, mixed);
  for (auto& v : bb) v *= 2.0;
  return bb;
}

}  // namespace vfi
