#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "vfi/errors.hpp"
#include "vfi/field.hpp"
#include "vfi/parallel.hpp"
#include "vfi/params.hpp"
#include "vfi/rfsynth.hpp"
#include "vfi/signal.hpp"

namespace vfi {

// Complex-baseband channel data, same layout as ChannelData.
struct BasebandChannelData {
  int frames = 0;
  int elements = 0;
  int fast_samples = 0;
  double fs_hz = 0.0;
  double f0_hz = 0.0;
  std::vector<cdouble> samples;

  const cdouble* line(int k, int j) const {
    return &samples[(static_cast<size_t>(k) * elements + j) * fast_samples];
  }
};

inline BasebandChannelData baseband_channels(const ChannelData& rf, double f0,
                                             int threads = 1) {
  BasebandChannelData bb;
  bb.frames = rf.frames;
  bb.elements = rf.elements;
  bb.fast_samples = rf.fast_samples;
  bb.fs_hz = rf.fs_hz;
  bb.f0_hz = f0;
  bb.samples.resize(rf.samples.size());
  const int lines = rf.frames * rf.elements;
  parallel_for(lines, threads, [&](int li) {
    const int k = li / rf.elements;
    const int j = li % rf.elements;
    std::vector<double> line(rf.line(k, j), rf.line(k, j) + rf.fast_samples);
    auto out = to_baseband(line, f0, rf.fs_hz);
    std::copy(out.begin(), out.end(),
              bb.samples.begin() + (static_cast<size_t>(k) * rf.elements + j) * rf.fast_samples);
  });
  return bb;
}

enum class Steer : uint8_t { None, Left, Right };

enum class Branch : uint8_t { Grid, SteeredL, SteeredR, DirectionalLine };

// Beamformed complex samples over slow time on one geometry: either a pixel
// grid (Grid / SteeredL / SteeredR) or a stack of horizontal lines
// (DirectionalLine).
struct BeamformedEnsemble {
  Branch branch = Branch::Grid;
  double steer_alpha_deg = 0.0;
  int frames = 0;
  int n_samples = 0;               // per frame
  std::vector<cdouble> values;     // frames * n_samples

  PixelGrid grid;                  // Grid / Steered branches

  std::vector<double> line_depths_m;  // DirectionalLine branch
  double line_x0_m = 0.0;
  double line_spacing_m = 0.0;
  int line_nx = 0;

  // per-sample, frame-independent aperture metadata
  std::vector<uint8_t> clipped;    // > 50% of nominal aperture off the array
  std::vector<double> sin_eff;     // apodization-weighted receive direction
  std::vector<double> cos_eff;

  cdouble& at(int frame, int sample) {
    return values[static_cast<size_t>(frame) * n_samples + sample];
  }
  cdouble at(int frame, int sample) const {
    return values[static_cast<size_t>(frame) * n_samples + sample];
  }
};

namespace detail {

// Receive aperture for one pixel: element range, normalized apodization
// weights, per-element delays and carrier-phase rotations.
struct PixelAperture {
  int j0 = 0;
  std::vector<double> weight;
  std::vector<double> delay_s;
  std::vector<cdouble> rotation;
  bool clipped = false;
  double sin_eff = 0.0;
  double cos_eff = 1.0;

  bool empty() const { return weight.empty(); }
};

inline PixelAperture make_aperture(double x, double z, const ArrayGeometry& geom,
                                   const AcquisitionParams& acq, double f_number,
                                   Apodization apod, Steer steer, double alpha_rad) {
  PixelAperture ap;
  const double half = z / (2.0 * f_number);
  double center = x;
  if (steer == Steer::Left) center = x - z * std::tan(alpha_rad);
  if (steer == Steer::Right) center = x + z * std::tan(alpha_rad);

  const double lo = center - half;
  const double hi = center + half;
  const double pitch = geom.pitch_m;
  const double first = geom.element_x.front();
  int jlo = static_cast<int>(std::ceil((lo - first) / pitch - 1e-9));
  int jhi = static_cast<int>(std::floor((hi - first) / pitch + 1e-9));
  const int nominal = jhi - jlo + 1;
  jlo = std::max(jlo, 0);
  jhi = std::min(jhi, geom.num_elements - 1);
  if (jhi < jlo || nominal <= 0) {
    ap.clipped = true;
    return ap;
  }
  ap.clipped = (jhi - jlo + 1) < (nominal + 1) / 2;

  ap.j0 = jlo;
  const int count = jhi - jlo + 1;
  ap.weight.resize(static_cast<size_t>(count));
  ap.delay_s.resize(static_cast<size_t>(count));
  ap.rotation.resize(static_cast<size_t>(count));

  const double c = acq.sound_speed_mps;
  const double w0 = 2.0 * std::numbers::pi * acq.tx_center_frequency_hz;
  double wsum = 0.0, ssum = 0.0, csum = 0.0;
  for (int j = jlo; j <= jhi; ++j) {
    const double e = geom.element_x[static_cast<size_t>(j)];
    double w = 1.0;
    if (apod == Apodization::Hanning) {
      const double u = (e - center) / half;  // in [-1, 1]
      w = 0.5 * (1.0 + std::cos(std::numbers::pi * u));
    }
    const double dx = x - e;
    const double dist = std::sqrt(dx * dx + z * z);
    const double tau = (z + dist) / c;
    const size_t i = static_cast<size_t>(j - jlo);
    ap.weight[i] = w;
    ap.delay_s[i] = tau;
    ap.rotation[i] = std::polar(1.0, w0 * tau);
    wsum += w;
    ssum += w * (e - x) / dist;
    csum += w * z / dist;
  }
  if (wsum <= 0.0) {
    ap.weight.clear();
    ap.clipped = true;
    return ap;
  }
  // renormalize for unity DC gain, also at clipped edges
  for (auto& w : ap.weight) w /= wsum;
  ap.sin_eff = ssum / wsum;
  ap.cos_eff = csum / wsum;
  return ap;
}

inline cdouble sample_aperture(const PixelAperture& ap, const BasebandChannelData& bb,
                               int frame) {
  cdouble acc{0.0, 0.0};
  const cdouble* line0 = bb.line(frame, 0);
  const int nfast = bb.fast_samples;
  for (size_t i = 0; i < ap.weight.size(); ++i) {
    const double u = ap.delay_s[i] * bb.fs_hz;
    const int i0 = static_cast<int>(u);
    if (i0 < 0 || i0 + 1 >= nfast) continue;
    const double frac = u - i0;
    const cdouble* line = line0 + static_cast<size_t>(ap.j0 + static_cast<int>(i)) * nfast;
    const cdouble v = (1.0 - frac) * line[i0] + frac * line[i0 + 1];
    acc += ap.weight[i] * v * ap.rotation[i];
  }
  return acc;
}

}  // namespace detail

struct DasSample {
  cdouble value{0.0, 0.0};
  bool clipped = false;
  double sin_eff = 0.0;
  double cos_eff = 1.0;
};

// Delay-and-sum for one pixel of one frame: dynamic receive focusing with an
// F-number-limited aperture, optionally steered left/right by offsetting the
// aperture center by z*tan(alpha).
inline DasSample das_pixel(const BasebandChannelData& bb, double x, double z,
                           const ArrayGeometry& geom, const AcquisitionParams& acq,
                           double f_number, Apodization apod, int frame = 0,
                           Steer steer = Steer::None, double alpha_rad = 0.0) {
  if (!(z > 0.0)) throw ValidationError("das_pixel: pixel depth must be > 0");
  auto ap = detail::make_aperture(x, z, geom, acq, f_number, apod, steer, alpha_rad);
  DasSample out;
  out.clipped = ap.clipped;
  out.sin_eff = ap.sin_eff;
  out.cos_eff = ap.cos_eff;
  if (!ap.empty()) out.value = detail::sample_aperture(ap, bb, frame);
  return out;
}

// DAS over a full pixel grid and all frames.
inline BeamformedEnsemble beamform_grid(const BasebandChannelData& bb, const PixelGrid& grid,
                                        const ArrayGeometry& geom, const AcquisitionParams& acq,
                                        const BeamformConfig& cfg, Steer steer = Steer::None,
                                        double alpha_deg = 0.0, int threads = 1) {
  BeamformedEnsemble out;
  out.branch = steer == Steer::None ? Branch::Grid
             : steer == Steer::Left ? Branch::SteeredL
                                    : Branch::SteeredR;
  out.steer_alpha_deg = alpha_deg;
  out.frames = bb.frames;
  out.grid = grid;
  out.n_samples = static_cast<int>(grid.size());
  out.values.assign(static_cast<size_t>(out.frames) * out.n_samples, cdouble{});
  out.clipped.assign(grid.size(), 0);
  out.sin_eff.assign(grid.size(), 0.0);
  out.cos_eff.assign(grid.size(), 1.0);
  if (grid.empty()) return out;
  const double alpha_rad = alpha_deg * std::numbers::pi / 180.0;

  parallel_for(grid.nz, threads, [&](int iz) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const size_t p = grid.index(ix, iz);
      auto ap = detail::make_aperture(grid.x(ix), grid.z(iz), geom, acq, cfg.f_number,
                                      cfg.apodization, steer, alpha_rad);
      out.clipped[p] = ap.clipped ? 1 : 0;
      out.sin_eff[p] = ap.sin_eff;
      out.cos_eff[p] = ap.cos_eff;
      if (ap.empty()) continue;
      for (int k = 0; k < bb.frames; ++k)
        out.at(k, static_cast<int>(p)) = detail::sample_aperture(ap, bb, k);
    }
  });
  return out;
}

// Unsteered DAS along horizontal lines at the given depths; sample spacing
// along each line is the directional-signal spacing (default lambda/10).
inline BeamformedEnsemble directional_lines(const BasebandChannelData& bb,
                                            const std::vector<double>& depths_m,
                                            double x_min, double x_max,
                                            const ArrayGeometry& geom,
                                            const AcquisitionParams& acq,
                                            const BeamformConfig& cfg, int threads = 1) {
  if (!(cfg.directional_line_spacing_m > 0.0))
    throw ValidationError("directional_lines: spacing must be > 0");
  BeamformedEnsemble out;
  out.branch = Branch::DirectionalLine;
  out.frames = bb.frames;
  out.line_depths_m = depths_m;
  out.line_x0_m = x_min;
  out.line_spacing_m = cfg.directional_line_spacing_m;
  out.line_nx =
      static_cast<int>(std::floor((x_max - x_min) / cfg.directional_line_spacing_m + 1e-9)) + 1;
  out.n_samples = static_cast<int>(depths_m.size()) * out.line_nx;
  out.values.assign(static_cast<size_t>(out.frames) * out.n_samples, cdouble{});
  out.clipped.assign(static_cast<size_t>(out.n_samples), 0);
  out.sin_eff.assign(static_cast<size_t>(out.n_samples), 0.0);
  out.cos_eff.assign(static_cast<size_t>(out.n_samples), 1.0);

  parallel_for(static_cast<int>(depths_m.size()), threads, [&](int d) {
    const double z = depths_m[static_cast<size_t>(d)];
    for (int i = 0; i < out.line_nx; ++i) {
      const double x = x_min + i * cfg.directional_line_spacing_m;
      const int p = d * out.line_nx + i;
      auto ap = detail::make_aperture(x, z, geom, acq, cfg.f_number, cfg.apodization,
                                      Steer::None, 0.0);
      out.clipped[static_cast<size_t>(p)] = ap.clipped ? 1 : 0;
      out.sin_eff[static_cast<size_t>(p)] = ap.sin_eff;
      out.cos_eff[static_cast<size_t>(p)] = ap.cos_eff;
      if (ap.empty()) continue;
      for (int k = 0; k < bb.frames; ++k)
        out.at(k, p) = detail::sample_aperture(ap, bb, k);
    }
  });
  return out;
}

}  // namespace vfi
