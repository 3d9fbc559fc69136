#pragma once

#include <cstdint>
#include <vector>

namespace vfi {

// Regular x-z pixel grid, row-major by depth row.
struct PixelGrid {
  double x0 = 0.0, z0 = 0.0;  // first pixel center [m]
  double dx = 0.0, dz = 0.0;
  int nx = 0, nz = 0;

  double x(int ix) const { return x0 + ix * dx; }
  double z(int iz) const { return z0 + iz * dz; }
  size_t index(int ix, int iz) const { return static_cast<size_t>(iz) * nx + ix; }
  size_t size() const { return static_cast<size_t>(nx) * nz; }
  bool empty() const { return nx == 0 || nz == 0; }

  static PixelGrid from_extent(double x_min, double x_max, double z_min, double z_max,
                               double dx, double dz) {
    PixelGrid g;
    g.x0 = x_min;
    g.z0 = z_min;
    g.dx = dx;
    g.dz = dz;
    g.nx = static_cast<int>((x_max - x_min) / dx + 1e-9) + 1;
    g.nz = static_cast<int>((z_max - z_min) / dz + 1e-9) + 1;
    return g;
  }
};

enum class EstMethod : uint8_t { None = 0, DirectionalXCorr = 1, Triangulation = 2 };

inline const char* to_string(EstMethod m) {
  switch (m) {
    case EstMethod::DirectionalXCorr: return "directional_xcorr";
    case EstMethod::Triangulation: return "triangulation";
    default: return "none";
  }
}

// Per-pixel velocity estimates plus bookkeeping: which branch produced the
// pixel, whether the estimate passed quality gating, and (for ground truth)
// which vessel owns the pixel.
struct VelocityField {
  PixelGrid grid;
  std::vector<double> vx;          // [m/s]
  std::vector<double> vz;          // [m/s]
  std::vector<EstMethod> method;
  std::vector<uint8_t> valid;      // quality gate passed
  std::vector<uint8_t> computed;   // pixel served by some branch
  std::vector<double> quality;     // [0,1]
  std::vector<int8_t> vessel_id;   // -1 outside all vessels

  static VelocityField zeros(const PixelGrid& g) {
    VelocityField f;
    f.grid = g;
    f.vx.assign(g.size(), 0.0);
    f.vz.assign(g.size(), 0.0);
    f.method.assign(g.size(), EstMethod::None);
    f.valid.assign(g.size(), 0);
    f.computed.assign(g.size(), 0);
    f.quality.assign(g.size(), 0.0);
    f.vessel_id.assign(g.size(), -1);
    return f;
  }
};

}  // namespace vfi
