#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vfi/errors.hpp"
#include "vfi/field.hpp"

namespace vfi {

// Depth-gated selection between the shallow (directional cross-correlation)
// and deep (triangulation) branches. Hard gate: depth >= z_limit takes the
// triangulation branch, no blending.
inline VelocityField fuse(const VelocityField& shallow, const VelocityField& deep,
                          double z_limit_m) {
  if (shallow.grid.nx != deep.grid.nx || shallow.grid.nz != deep.grid.nz)
    throw ValidationError("fuse: branch grids do not match");
  VelocityField out = VelocityField::zeros(shallow.grid);
  const PixelGrid& g = out.grid;
  for (int iz = 0; iz < g.nz; ++iz) {
    const bool use_deep = g.z(iz) >= z_limit_m;
    const VelocityField& src = use_deep ? deep : shallow;
    for (int ix = 0; ix < g.nx; ++ix) {
      const size_t p = g.index(ix, iz);
      if (!src.computed[p])
        throw ValidationError("fuse: depth " + std::to_string(g.z(iz)) +
                              " m not covered by the " +
                              (use_deep ? std::string("triangulation")
                                        : std::string("directional")) +
                              " branch");
      out.vx[p] = src.vx[p];
      out.vz[p] = src.vz[p];
      out.method[p] = src.valid[p]
                          ? (use_deep ? EstMethod::Triangulation : EstMethod::DirectionalXCorr)
                          : EstMethod::None;
      out.valid[p] = src.valid[p];
      out.computed[p] = 1;
      out.quality[p] = src.quality[p];
      out.vessel_id[p] = src.vessel_id[p];
    }
  }
  return out;
}

struct VesselMetrics {
  int vessel_id = -1;
  double mean_bias_pct = 0.0;
  double std_pct = 0.0;
  size_t n_valid = 0;
};

// Table-II-style metrics: mean magnitude of the vector error of the
// across-ensemble mean estimate, and the across-ensemble spread, both as a
// percentage of the peak velocity, pooled over valid in-vessel pixels.
struct ProfileMetrics {
  double mean_bias_pct = 0.0;
  double std_pct = 0.0;
  size_t n_valid = 0;
  std::vector<VesselMetrics> per_vessel;
};

inline ProfileMetrics evaluate(std::span<const VelocityField> estimates,
                               const VelocityField& truth, double v_peak) {
  if (estimates.empty()) throw ValidationError("evaluate: no estimated fields");
  if (!(v_peak > 0.0)) throw ValidationError("evaluate: v_peak must be > 0");
  for (const auto& e : estimates) {
    if (e.grid.nx != truth.grid.nx || e.grid.nz != truth.grid.nz ||
        std::abs(e.grid.x0 - truth.grid.x0) > 1e-12 ||
        std::abs(e.grid.z0 - truth.grid.z0) > 1e-12)
      throw ValidationError("evaluate: estimate grid does not match the truth grid");
  }
  const size_t n = truth.grid.size();
  const size_t ne = estimates.size();

  struct Acc {
    double bias_sum = 0.0;
    double std_sum = 0.0;
    size_t count = 0;
  };
  Acc total;
  std::vector<Acc> per_vessel;
  for (size_t p = 0; p < n; ++p) {
    if (truth.vessel_id[p] < 0) continue;
    bool usable = true;
    for (const auto& e : estimates)
      if (!e.computed[p] || !e.valid[p]) { usable = false; break; }
    if (!usable) continue;
    double mx = 0.0, mz = 0.0;
    for (const auto& e : estimates) {
      mx += e.vx[p];
      mz += e.vz[p];
    }
    mx /= static_cast<double>(ne);
    mz /= static_cast<double>(ne);
    const double err = std::hypot(mx - truth.vx[p], mz - truth.vz[p]);
    double var = 0.0;
    for (const auto& e : estimates) {
      const double dx = e.vx[p] - mx;
      const double dz = e.vz[p] - mz;
      var += dx * dx + dz * dz;
    }
    var /= static_cast<double>(ne);
    const double sd = std::sqrt(var);

    const size_t vid = static_cast<size_t>(truth.vessel_id[p]);
    if (per_vessel.size() <= vid) per_vessel.resize(vid + 1);
    for (Acc* a : {&total, &per_vessel[vid]}) {
      a->bias_sum += err;
      a->std_sum += sd;
      a->count += 1;
    }
  }

  ProfileMetrics m;
  m.n_valid = total.count;
  if (total.count > 0) {
    m.mean_bias_pct = 100.0 * total.bias_sum / total.count / v_peak;
    m.std_pct = 100.0 * total.std_sum / total.count / v_peak;
  }
  for (size_t v = 0; v < per_vessel.size(); ++v) {
    VesselMetrics vm;
    vm.vessel_id = static_cast<int>(v);
    vm.n_valid = per_vessel[v].count;
    if (per_vessel[v].count > 0) {
      vm.mean_bias_pct = 100.0 * per_vessel[v].bias_sum / per_vessel[v].count / v_peak;
      vm.std_pct = 100.0 * per_vessel[v].std_sum / per_vessel[v].count / v_peak;
    }
    m.per_vessel.push_back(vm);
  }
  return m;
}

// Depth profile of velocity magnitude for plotting: per grid row, the mean
// over valid in-vessel pixels of the across-ensemble mean estimate, its
// spread, and the true magnitude.
struct DepthProfileRow {
  double z_m = 0.0;
  double v_true = 0.0;
  double v_est_mean = 0.0;
  double v_est_std = 0.0;
  size_t n = 0;
};

inline std::vector<DepthProfileRow> depth_profile(std::span<const VelocityField> estimates,
                                                  const VelocityField& truth) {
  std::vector<DepthProfileRow> rows;
  const PixelGrid& g = truth.grid;
  const size_t ne = estimates.size();
  for (int iz = 0; iz < g.nz; ++iz) {
    DepthProfileRow row;
    row.z_m = g.z(iz);
    double true_sum = 0.0, est_sum = 0.0, std_sum = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) {
      const size_t p = g.index(ix, iz);
      if (truth.vessel_id[p] < 0) continue;
      bool usable = true;
      for (const auto& e : estimates)
        if (!e.computed[p] || !e.valid[p]) { usable = false; break; }
      if (!usable) continue;
      double mx = 0.0, mz = 0.0;
      for (const auto& e : estimates) {
        mx += e.vx[p];
        mz += e.vz[p];
      }
      mx /= static_cast<double>(ne);
      mz /= static_cast<double>(ne);
      double var = 0.0;
      for (const auto& e : estimates) {
        const double dx = e.vx[p] - mx;
        const double dz = e.vz[p] - mz;
        var += dx * dx + dz * dz;
      }
      var /= static_cast<double>(ne);
      true_sum += std::hypot(truth.vx[p], truth.vz[p]);
      est_sum += std::hypot(mx, mz);
      std_sum += std::sqrt(var);
      row.n += 1;
    }
    if (row.n == 0) continue;
    row.v_true = true_sum / static_cast<double>(row.n);
    row.v_est_mean = est_sum / static_cast<double>(row.n);
    row.v_est_std = std_sum / static_cast<double>(row.n);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace vfi
