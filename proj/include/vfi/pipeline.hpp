#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vfi/beamform.hpp"
#include "vfi/clutter.hpp"
#include "vfi/errors.hpp"
#include "vfi/estimators.hpp"
#include "vfi/fusion.hpp"
#include "vfi/params.hpp"
#include "vfi/phantom.hpp"
#include "vfi/rfsynth.hpp"

namespace vfi {

// Phantom + evaluation-region description for one experiment.
struct Scenario {
  std::string name = "two_vessel";
  std::vector<VesselSpec> vessels;
  double grid_x_min_m = -2.5e-3;
  double grid_x_max_m = 2.5e-3;
  double grid_z_min_m = 4e-3;
  double grid_z_max_m = 27e-3;
  double scatterer_density_per_mm2 = 40.0;
  double background_density_per_mm2 = 5.0;
  double background_margin_m = 3.5e-3;
  double background_amplitude = 1.0;
  std::optional<double> snr_db;  // empty = noise-free
  // the synthetic background is perfectly static, so eigen-filtering is off
  // by default; raise n_cut when simulating tissue motion or real data
  int clutter_n_cut = 0;
  double quality_threshold = 0.3;
  double v_max_mps = 0.0;  // 0 = 2 x max vessel peak velocity

  double v_peak() const {
    double v = 0.0;
    for (const auto& ves : vessels) v = std::max(v, ves.peak_velocity_mps);
    return v;
  }
  double v_max() const {
    if (v_max_mps > 0.0) return v_max_mps;
    const double vp = v_peak();
    return vp > 0.0 ? 2.0 * vp : 1.0;
  }
};

inline VesselSpec make_vessel(double cx, double cz, double radius, double incl_deg,
                              double v0, double half_length) {
  VesselSpec v;
  v.center_x_m = cx;
  v.center_z_m = cz;
  v.radius_m = radius;
  v.inclination_deg = incl_deg;
  v.peak_velocity_mps = v0;
  v.half_length_m = half_length;
  return v;
}

// Superficial transverse vessel plus a deep inclined one, laid out so the
// shallow tube sits mostly above and the deep tube fully below the limiting
// depth.
inline Scenario scenario_two_vessel() {
  Scenario s;
  s.name = "two_vessel";
  s.vessels.push_back(make_vessel(0.0, 8e-3, 4e-3, 0.0, 0.5, 6e-3));
  s.vessels.push_back(make_vessel(0.0, 22e-3, 5e-3, 10.0, 0.5, 6e-3));
  return s;
}

inline Scenario scenario_shallow_only() {
  Scenario s;
  s.name = "shallow_only";
  s.vessels.push_back(make_vessel(0.0, 8e-3, 4e-3, 0.0, 0.5, 6e-3));
  s.grid_z_min_m = 4.5e-3;
  s.grid_z_max_m = 11.5e-3;
  return s;
}

inline Scenario scenario_deep_only() {
  Scenario s;
  s.name = "deep_only";
  s.vessels.push_back(make_vessel(0.0, 22e-3, 5e-3, 10.0, 0.5, 6e-3));
  s.grid_z_min_m = 17e-3;
  s.grid_z_max_m = 27e-3;
  return s;
}

inline Scenario named_scenario(const std::string& name) {
  if (name == "two_vessel") return scenario_two_vessel();
  if (name == "shallow_only") return scenario_shallow_only();
  if (name == "deep_only") return scenario_deep_only();
  throw ValidationError("unknown scenario '" + name + "'");
}

enum class Method { Directional, Stdmr, Fusion };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Directional: return "directional";
    case Method::Stdmr: return "stdmr";
    default: return "fusion";
  }
}

struct MethodResult {
  Method method = Method::Fusion;
  ProfileMetrics metrics;
  std::vector<VelocityField> fields;  // one per ensemble
  std::vector<DepthProfileRow> profile;
};

struct PipelineResult {
  VelocityField truth;
  double z_limit_m = 0.0;
  double v_peak = 0.0;
  std::vector<MethodResult> methods;
};

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
  uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace detail {

inline PixelGrid row_slice(const PixelGrid& g, int iz0, int nz) {
  PixelGrid s = g;
  s.z0 = g.z(iz0);
  s.nz = nz;
  return s;
}

// Directional branch for one ensemble: beamform + clutter filter + per-depth
// cross-correlation, broadcast across each row.
inline VelocityField directional_branch(const BasebandChannelData& bb, const PixelGrid& grid,
                                        int iz0, int nrows, const Config& cfg,
                                        const Scenario& sc, int threads) {
  VelocityField field = VelocityField::zeros(grid);
  if (nrows <= 0) return field;
  std::vector<double> depths;
  depths.reserve(static_cast<size_t>(nrows));
  for (int iz = iz0; iz < iz0 + nrows; ++iz) depths.push_back(grid.z(iz));

  auto lines = directional_lines(bb, depths, grid.x0, grid.x(grid.nx - 1),
                                 cfg.array, cfg.acq, cfg.beamform, threads);
  if (sc.clutter_n_cut > 0) lines = svd_filter(lines, sc.clutter_n_cut);
  const double spacing = cfg.beamform.directional_line_spacing_m;
  const int max_lag =
      std::max(1, static_cast<int>(std::ceil(1.5 * sc.v_max() / (cfg.acq.prf_hz * spacing))));
  const auto profile = directional_velocity(lines, cfg.acq.prf_hz, max_lag);

  for (int r = 0; r < nrows; ++r) {
    const auto& est = profile.estimate[static_cast<size_t>(r)];
    const bool ok = profile.valid[static_cast<size_t>(r)] &&
                    est.quality >= sc.quality_threshold &&
                    std::hypot(est.vx, est.vz) <= sc.v_max();
    for (int ix = 0; ix < grid.nx; ++ix) {
      const size_t p = grid.index(ix, iz0 + r);
      field.computed[p] = 1;
      field.vx[p] = est.vx;
      field.vz[p] = est.vz;
      field.quality[p] = est.quality;
      field.valid[p] = ok ? 1 : 0;
      field.method[p] = EstMethod::DirectionalXCorr;
    }
  }
  return field;
}

// Triangulation (STDMR) branch for one ensemble: steered L/R grids per
// receive angle, clutter filter, Kasai frequencies, weighted LS fit.
inline VelocityField stdmr_branch(const BasebandChannelData& bb, const PixelGrid& grid,
                                  int iz0, int nrows, const Config& cfg, const Scenario& sc,
                                  int threads) {
  VelocityField field = VelocityField::zeros(grid);
  if (nrows <= 0) return field;
  const PixelGrid sub = row_slice(grid, iz0, nrows);

  const auto& angles = cfg.beamform.rx_angles_deg;
  std::vector<BeamformedEnsemble> left, right;
  left.reserve(angles.size());
  right.reserve(angles.size());
  for (double a : angles) {
    auto l = beamform_grid(bb, sub, cfg.array, cfg.acq, cfg.beamform, Steer::Left, a, threads);
    auto r = beamform_grid(bb, sub, cfg.array, cfg.acq, cfg.beamform, Steer::Right, a, threads);
    if (sc.clutter_n_cut > 0) {
      l = svd_filter(l, sc.clutter_n_cut);
      r = svd_filter(r, sc.clutter_n_cut);
    }
    left.push_back(std::move(l));
    right.push_back(std::move(r));
  }

  const double rad2deg = 180.0 / std::numbers::pi;
  const int K = bb.frames;
  std::vector<cdouble> slow(static_cast<size_t>(K));
  for (size_t p = 0; p < sub.size(); ++p) {
    std::vector<FrequencyPair> pairs;
    pairs.reserve(angles.size());
    for (size_t ai = 0; ai < angles.size(); ++ai) {
      const auto& l = left[ai];
      const auto& r = right[ai];
      for (int k = 0; k < K; ++k) slow[static_cast<size_t>(k)] = l.at(k, static_cast<int>(p));
      const auto kl = kasai_frequency(slow, cfg.acq.prf_hz);
      for (int k = 0; k < K; ++k) slow[static_cast<size_t>(k)] = r.at(k, static_cast<int>(p));
      const auto kr = kasai_frequency(slow, cfg.acq.prf_hz);
      FrequencyPair pair;
      // sign convention: positive frequency = increasing round-trip delay
      pair.f_left_hz = -kl.f_hz;
      pair.f_right_hz = -kr.f_hz;
      // effective receive angle of the realized (possibly clipped) apertures
      const double al = std::asin(std::min(1.0, std::abs(l.sin_eff[p])));
      const double ar = std::asin(std::min(1.0, std::abs(r.sin_eff[p])));
      pair.alpha_deg = 0.5 * (al + ar) * rad2deg;
      pair.quality = std::min(kl.quality, kr.quality);
      if (pair.alpha_deg > 1e-3) pairs.push_back(pair);
    }
    const auto est = stdmr_estimate(pairs, cfg.acq.sound_speed_mps,
                                    cfg.acq.tx_center_frequency_hz, sc.quality_threshold);
    const int ix = static_cast<int>(p) % sub.nx;
    const int iz = iz0 + static_cast<int>(p) / sub.nx;
    const size_t q = grid.index(ix, iz);
    field.computed[q] = 1;
    field.method[q] = EstMethod::Triangulation;
    if (est && std::hypot(est->vx, est->vz) <= sc.v_max()) {
      field.vx[q] = est->vx;
      field.vz[q] = est->vz;
      field.quality[q] = est->quality;
      field.valid[q] = 1;
    }
  }
  return field;
}

}  // namespace detail

inline double scenario_z_max(const Config& cfg, const Scenario& sc) {
  double z = sc.grid_z_max_m;
  if (sc.background_density_per_mm2 > 0.0) z += sc.background_margin_m;
  for (const auto& v : sc.vessels)
    z = std::max(z, v.center_z_m + v.radius_m +
                        v.half_length_m * std::abs(std::sin(v.theta_rad())));
  return z + 1e-3;
}

// Phantom seeding + RF synthesis for all ensembles. Blood scatterers are
// re-drawn per ensemble; the static background is shared.
inline std::vector<ChannelData> simulate_ensembles(const Config& cfg, const Scenario& sc,
                                                   uint64_t master_seed) {
  if (sc.vessels.empty()) throw ValidationError("simulate: scenario has no vessels");
  const double z_max = scenario_z_max(cfg, sc);
  PulseSpec pulse;
  pulse.center_frequency_hz = cfg.acq.tx_center_frequency_hz;
  std::vector<ChannelData> out;
  out.reserve(static_cast<size_t>(cfg.acq.ensembles));
  for (int e = 0; e < cfg.acq.ensembles; ++e) {
    auto field = seed_scatterers(sc.vessels, sc.scatterer_density_per_mm2,
                                 derive_seed(master_seed, 1000 + static_cast<uint64_t>(e)));
    if (sc.background_density_per_mm2 > 0.0)
      add_background_scatterers(field, sc.vessels,
                                sc.grid_x_min_m - sc.background_margin_m,
                                sc.grid_x_max_m + sc.background_margin_m,
                                std::max(1e-3, sc.grid_z_min_m - sc.background_margin_m),
                                sc.grid_z_max_m + sc.background_margin_m,
                                sc.background_density_per_mm2, derive_seed(master_seed, 7),
                                sc.background_amplitude);
    auto rf = synthesize_ensemble(field, sc.vessels, cfg.array, cfg.acq, pulse, z_max);
    if (sc.snr_db)
      rf = add_noise(rf, *sc.snr_db, derive_seed(master_seed, 2000 + static_cast<uint64_t>(e)));
    out.push_back(std::move(rf));
  }
  return out;
}

// Beamforming, clutter filtering, estimation, fusion and evaluation over
// pre-synthesized channel-data ensembles.
inline PipelineResult estimate_pipeline(const Config& cfg, const Scenario& sc,
                                        const std::vector<ChannelData>& ensembles,
                                        const std::vector<Method>& methods, int threads = 1) {
  if (sc.vessels.empty()) throw ValidationError("estimate: scenario has no vessels");
  if (ensembles.empty()) throw ValidationError("estimate: no channel-data ensembles");
  const PixelGrid grid = PixelGrid::from_extent(sc.grid_x_min_m, sc.grid_x_max_m,
                                                sc.grid_z_min_m, sc.grid_z_max_m,
                                                cfg.beamform.grid_dx_m, cfg.beamform.grid_dz_m);
  PipelineResult result;
  result.truth = true_velocity_field(grid, sc.vessels);
  result.z_limit_m = cfg.fusion.limiting_depth_m;
  result.v_peak = sc.v_peak();

  const bool want_dir = std::find(methods.begin(), methods.end(), Method::Directional) != methods.end();
  const bool want_tri = std::find(methods.begin(), methods.end(), Method::Stdmr) != methods.end();
  const bool want_fusion = std::find(methods.begin(), methods.end(), Method::Fusion) != methods.end();

  int iz_gate = grid.nz;
  for (int iz = 0; iz < grid.nz; ++iz)
    if (grid.z(iz) >= result.z_limit_m) { iz_gate = iz; break; }

  const int dir_rows = want_dir ? grid.nz : (want_fusion ? iz_gate : 0);
  const int tri_rows0 = want_tri ? 0 : iz_gate;
  const int tri_rows = want_tri ? grid.nz : (want_fusion ? grid.nz - iz_gate : 0);

  std::vector<VelocityField> dir_fields, tri_fields, fusion_fields;
  for (const auto& rf : ensembles) {
    const auto bb = baseband_channels(rf, cfg.acq.tx_center_frequency_hz, threads);

    if (dir_rows > 0)
      dir_fields.push_back(detail::directional_branch(bb, grid, 0, dir_rows, cfg, sc, threads));
    if (tri_rows > 0)
      tri_fields.push_back(detail::stdmr_branch(bb, grid, tri_rows0, tri_rows, cfg, sc, threads));
  }

  // vessel ids for all fields come from the truth grid
  auto stamp_vessels = [&](std::vector<VelocityField>& fields) {
    for (auto& f : fields) f.vessel_id = result.truth.vessel_id;
  };
  stamp_vessels(dir_fields);
  stamp_vessels(tri_fields);

  if (want_fusion) {
    VelocityField empty = VelocityField::zeros(grid);
    for (size_t e = 0; e < ensembles.size(); ++e) {
      const VelocityField& shallow = dir_fields.empty() ? empty : dir_fields[e];
      const VelocityField& deep = tri_fields.empty() ? empty : tri_fields[e];
      fusion_fields.push_back(fuse(shallow, deep, result.z_limit_m));
    }
    stamp_vessels(fusion_fields);
  }

  auto push_result = [&](Method m, std::vector<VelocityField>&& fields) {
    MethodResult mr;
    mr.method = m;
    mr.metrics = evaluate(fields, result.truth, result.v_peak > 0.0 ? result.v_peak : 1.0);
    mr.profile = depth_profile(fields, result.truth);
    mr.fields = std::move(fields);
    result.methods.push_back(std::move(mr));
  };
  for (Method m : methods) {
    if (m == Method::Directional) push_result(m, std::move(dir_fields));
    else if (m == Method::Stdmr) push_result(m, std::move(tri_fields));
    else push_result(m, std::move(fusion_fields));
  }
  return result;
}

// End-to-end run: synthesize and estimate in one go, deterministic per seed.
inline PipelineResult run_pipeline(const Config& cfg, const Scenario& sc, uint64_t master_seed,
                                   const std::vector<Method>& methods, int threads = 1) {
  return estimate_pipeline(cfg, sc, simulate_ensembles(cfg, sc, master_seed), methods, threads);
}

}  // namespace vfi
