#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vfi/errors.hpp"
#include "vfi/params.hpp"
#include "vfi/phantom.hpp"

namespace vfi {

// Gaussian-enveloped cosine pulse; fractional bandwidth is the -6 dB
// spectral width relative to the center frequency.
struct PulseSpec {
  double center_frequency_hz = 8e6;
  double fractional_bandwidth = 0.6;

  void validate() const {
    if (!(fractional_bandwidth > 0.0) || !(fractional_bandwidth < 2.0))
      throw ValidationError("fractional_bandwidth: must lie in (0, 2)");
  }

  double sigma_s() const {
    const double bw_hz = fractional_bandwidth * center_frequency_hz;
    return std::sqrt(2.0 * std::numbers::ln2) / (std::numbers::pi * bw_hz);
  }

  double operator()(double tau) const {
    const double s = sigma_s();
    return std::exp(-tau * tau / (2.0 * s * s)) *
           std::cos(2.0 * std::numbers::pi * center_frequency_hz * tau);
  }

  // envelope support used during synthesis
  double half_support_s() const { return 5.0 * sigma_s(); }
};

// Per-ensemble RF channel data: [frame][element][fast-time], fast-time sample
// 0 at the transmit instant, dt = 1/fs.
struct ChannelData {
  int frames = 0;
  int elements = 0;
  int fast_samples = 0;
  double fs_hz = 0.0;
  std::vector<double> samples;  // frames * elements * fast_samples

  double& at(int k, int j, int n) {
    return samples[(static_cast<size_t>(k) * elements + j) * fast_samples + n];
  }
  double at(int k, int j, int n) const {
    return samples[(static_cast<size_t>(k) * elements + j) * fast_samples + n];
  }
  const double* line(int k, int j) const {
    return &samples[(static_cast<size_t>(k) * elements + j) * fast_samples];
  }
  double* line(int k, int j) {
    return &samples[(static_cast<size_t>(k) * elements + j) * fast_samples];
  }

  static ChannelData zeros(int frames, int elements, int fast_samples, double fs_hz) {
    ChannelData d;
    d.frames = frames;
    d.elements = elements;
    d.fast_samples = fast_samples;
    d.fs_hz = fs_hz;
    d.samples.assign(static_cast<size_t>(frames) * elements * fast_samples, 0.0);
    return d;
  }
};

// Fast-time sample count covering max depth with a 20% margin plus pulse tail.
inline int fast_time_samples(double z_max_m, const AcquisitionParams& acq,
                             const PulseSpec& pulse) {
  const double t_max = 2.0 * z_max_m * 1.2 / acq.sound_speed_mps + pulse.half_support_s();
  return static_cast<int>(std::ceil(t_max * acq.sampling_frequency_hz)) + 1;
}

// Linear pulse-echo model for a non-steered plane-wave transmit: round-trip
// time for scatterer s and element j is (z_s + |r_s - e_j|)/c. Reception is
// weighted by the hard-baffled element directivity
// cos(theta) sinc(pi w/lambda sin(theta)), which suppresses the oblique
// sidelobe arcs that a point-receiver model would let through.
inline void synthesize_frame_into(ChannelData& data, int frame,
                                  const ScattererField& field,
                                  const ArrayGeometry& geom,
                                  const AcquisitionParams& acq,
                                  const PulseSpec& pulse) {
  pulse.validate();
  const double c = acq.sound_speed_mps;
  const double fs = acq.sampling_frequency_hz;
  const double half = pulse.half_support_s();
  const double t_window = (data.fast_samples - 1) / fs;
  const double sigma = pulse.sigma_s();
  const double inv_2s2 = 1.0 / (2.0 * sigma * sigma);
  const double w0 = 2.0 * std::numbers::pi * pulse.center_frequency_hz;
  const double width = geom.pitch_m - geom.kerf_m;
  const double lambda = c / pulse.center_frequency_hz;

  for (size_t s = 0; s < field.size(); ++s) {
    const double xs = field.x_m[s];
    const double zs = field.z_m[s];
    const double a = field.amplitude[s];
    for (int j = 0; j < geom.num_elements; ++j) {
      const double dx = xs - geom.element_x[static_cast<size_t>(j)];
      const double dist = std::sqrt(dx * dx + zs * zs);
      const double t = (zs + dist) / c;
      if (t + half > t_window)
        throw NumericalError("synthesize_frame: scatterer echo beyond the sample window");
      const double sin_t = dx / dist;
      const double u = std::numbers::pi * width / lambda * sin_t;
      const double dir = (zs / dist) * (std::abs(u) < 1e-12 ? 1.0 : std::sin(u) / u);
      const double aj = a * dir;
      const int n0 = std::max(0, static_cast<int>(std::floor((t - half) * fs)));
      const int n1 = std::min(data.fast_samples - 1,
                              static_cast<int>(std::ceil((t + half) * fs)));
      double* line = data.line(frame, j);
      for (int n = n0; n <= n1; ++n) {
        const double tau = n / fs - t;
        line[n] += aj * std::exp(-tau * tau * inv_2s2) * std::cos(w0 * tau);
      }
    }
  }
}

inline ChannelData synthesize_frame(const ScattererField& field, const ArrayGeometry& geom,
                                    const AcquisitionParams& acq, const PulseSpec& pulse,
                                    double z_max_m) {
  ChannelData d = ChannelData::zeros(1, geom.num_elements,
                                     fast_time_samples(z_max_m, acq, pulse),
                                     acq.sampling_frequency_hz);
  synthesize_frame_into(d, 0, field, geom, acq, pulse);
  return d;
}

// K frames; the scatterer field advances by 1/f_prf between emissions.
inline ChannelData synthesize_ensemble(const ScattererField& initial,
                                       const std::vector<VesselSpec>& vessels,
                                       const ArrayGeometry& geom,
                                       const AcquisitionParams& acq,
                                       const PulseSpec& pulse, double z_max_m) {
  if (acq.frames_per_ensemble < 2)
    throw ValidationError("synthesize_ensemble: frames_per_ensemble must be >= 2");
  ChannelData d = ChannelData::zeros(acq.frames_per_ensemble, geom.num_elements,
                                     fast_time_samples(z_max_m, acq, pulse),
                                     acq.sampling_frequency_hz);
  ScattererField field = initial;
  for (int k = 0; k < acq.frames_per_ensemble; ++k) {
    if (k > 0) field = advance_scatterers(field, vessels, acq.frame_dt());
    synthesize_frame_into(d, k, field, geom, acq, pulse);
  }
  return d;
}

// White Gaussian noise at the requested SNR; signal power measured over the
// nonzero support.
inline ChannelData add_noise(const ChannelData& data, double snr_db, uint64_t rng_seed) {
  if (data.samples.empty()) throw ValidationError("add_noise: empty channel data");
  if (std::isinf(snr_db)) return data;
  double power = 0.0;
  size_t support = 0;
  for (double v : data.samples) {
    if (v != 0.0) {
      power += v * v;
      ++support;
    }
  }
  if (support == 0) return data;
  power /= static_cast<double>(support);
  const double noise_std = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  ChannelData out = data;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> n(0.0, noise_std);
  for (double& v : out.samples) v += n(rng);
  return out;
}

}  // namespace vfi
