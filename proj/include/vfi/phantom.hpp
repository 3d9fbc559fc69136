#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "vfi/errors.hpp"
#include "vfi/field.hpp"

namespace vfi {

// Straight cylindrical vessel segment carrying parabolic (Poiseuille) flow.
// inclination_deg is measured from the lateral (x) axis; z points downward.
struct VesselSpec {
  double center_x_m = 0.0;
  double center_z_m = 0.0;
  double radius_m = 0.0;           // R
  double inclination_deg = 0.0;    // theta
  double peak_velocity_mps = 0.0;  // v_0 at the axis
  double half_length_m = 0.0;      // extent along the vessel axis

  double theta_rad() const { return inclination_deg * std::numbers::pi / 180.0; }
  // unit vector along the axis, flow direction
  double ux() const { return std::cos(theta_rad()); }
  double uz() const { return std::sin(theta_rad()); }

  void validate() const {
    if (!(radius_m > 0.0)) throw ValidationError("vessel radius_m: must be > 0");
    if (peak_velocity_mps < 0.0) throw ValidationError("vessel peak_velocity_mps: must be >= 0");
    if (!(std::abs(inclination_deg) < 90.0))
      throw ValidationError("vessel inclination_deg: must satisfy |theta| < 90");
    if (!(half_length_m > 0.0)) throw ValidationError("vessel half_length_m: must be > 0");
  }

  // signed axial / perpendicular coordinates of a point
  double axial(double x, double z) const {
    return (x - center_x_m) * ux() + (z - center_z_m) * uz();
  }
  double perp(double x, double z) const {
    return -(x - center_x_m) * uz() + (z - center_z_m) * ux();
  }
};

struct ScattererField {
  std::vector<double> x_m;
  std::vector<double> z_m;
  std::vector<double> amplitude;
  std::vector<int8_t> vessel_id;  // -1 = static background

  size_t size() const { return x_m.size(); }
};

// v(r) = v0 (1 - (r/R)^2) along the axis inside the tube, zero outside.
inline void parabolic_velocity(double x, double z, const VesselSpec& v,
                               double* vx, double* vz) {
  const double r = std::abs(v.perp(x, z));
  if (r <= v.radius_m && v.peak_velocity_mps > 0.0) {
    const double rr = r / v.radius_m;
    const double speed = v.peak_velocity_mps * (1.0 - rr * rr);
    *vx = speed * v.ux();
    *vz = speed * v.uz();
  } else {
    *vx = 0.0;
    *vz = 0.0;
  }
}

// Uniform scatterers in each vessel tube (rectangle in axis/perpendicular
// coordinates), count = round(tube area x density), amplitudes ~ N(0,1).
inline ScattererField seed_scatterers(const std::vector<VesselSpec>& vessels,
                                      double density_per_mm2, uint64_t rng_seed) {
  if (!(density_per_mm2 > 0.0))
    throw ValidationError("scatterer density: must be > 0");
  ScattererField field;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int8_t id = 0;
  for (const auto& v : vessels) {
    v.validate();
    const double area_mm2 = (2.0 * v.radius_m * 1e3) * (2.0 * v.half_length_m * 1e3);
    const auto count = static_cast<size_t>(std::llround(area_mm2 * density_per_mm2));
    for (size_t i = 0; i < count; ++i) {
      const double s = (2.0 * unit(rng) - 1.0) * v.half_length_m;
      const double r = (2.0 * unit(rng) - 1.0) * v.radius_m;
      field.x_m.push_back(v.center_x_m + s * v.ux() - r * v.uz());
      field.z_m.push_back(v.center_z_m + s * v.uz() + r * v.ux());
      field.amplitude.push_back(amp(rng));
      field.vessel_id.push_back(id);
    }
    ++id;
  }
  return field;
}

// Static background (tissue) scatterers over a rectangle, skipping vessel
// interiors.
inline void add_background_scatterers(ScattererField& field,
                                      const std::vector<VesselSpec>& vessels,
                                      double x_min, double x_max, double z_min, double z_max,
                                      double density_per_mm2, uint64_t rng_seed,
                                      double amplitude_scale = 1.0) {
  if (density_per_mm2 <= 0.0) return;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> ux(x_min, x_max);
  std::uniform_real_distribution<double> uz(z_min, z_max);
  const double area_mm2 = (x_max - x_min) * 1e3 * (z_max - z_min) * 1e3;
  const auto count = static_cast<size_t>(std::llround(area_mm2 * density_per_mm2));
  for (size_t i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double z = uz(rng);
    const double a = amp(rng) * amplitude_scale;
    bool inside = false;
    for (const auto& v : vessels)
      if (std::abs(v.perp(x, z)) <= v.radius_m) { inside = true; break; }
    if (inside) continue;
    field.x_m.push_back(x);
    field.z_m.push_back(z);
    field.amplitude.push_back(a);
    field.vessel_id.push_back(-1);
  }
}

// Advance vessel scatterers by their local parabolic velocity; scatterers
// leaving the +/- half_length extent wrap to the opposite end at the same
// radial offset (steady-state flow). Background stays put.
inline ScattererField advance_scatterers(const ScattererField& field,
                                         const std::vector<VesselSpec>& vessels,
                                         double dt) {
  if (!(dt > 0.0)) throw ValidationError("advance_scatterers: dt must be > 0");
  ScattererField out = field;
  for (size_t i = 0; i < out.size(); ++i) {
    const int8_t id = out.vessel_id[i];
    if (id < 0 || static_cast<size_t>(id) >= vessels.size()) continue;
    const VesselSpec& v = vessels[static_cast<size_t>(id)];
    double s = v.axial(out.x_m[i], out.z_m[i]);
    const double r = v.perp(out.x_m[i], out.z_m[i]);
    const double rr = std::abs(r) / v.radius_m;
    const double speed =
        rr <= 1.0 ? v.peak_velocity_mps * (1.0 - rr * rr) : 0.0;
    s += speed * dt;
    const double span = 2.0 * v.half_length_m;
    while (s > v.half_length_m) s -= span;
    while (s < -v.half_length_m) s += span;
    out.x_m[i] = v.center_x_m + s * v.ux() - r * v.uz();
    out.z_m[i] = v.center_z_m + s * v.uz() + r * v.ux();
  }
  return out;
}

// Ground-truth field on a pixel grid; overlapping vessels resolved
// first-listed-wins.
inline VelocityField true_velocity_field(const PixelGrid& grid,
                                         const std::vector<VesselSpec>& vessels) {
  if (grid.empty()) throw ValidationError("true_velocity_field: empty grid");
  VelocityField f = VelocityField::zeros(grid);
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const size_t p = grid.index(ix, iz);
      f.computed[p] = 1;
      f.valid[p] = 1;
      f.quality[p] = 1.0;
      for (size_t vi = 0; vi < vessels.size(); ++vi) {
        const auto& v = vessels[vi];
        if (std::abs(v.perp(grid.x(ix), grid.z(iz))) <= v.radius_m) {
          parabolic_velocity(grid.x(ix), grid.z(iz), v, &f.vx[p], &f.vz[p]);
          f.vessel_id[p] = static_cast<int8_t>(vi);
          break;
        }
      }
    }
  }
  return f;
}

}  // namespace vfi
