#include <catch_amalgamated.hpp>

#include <cmath>

#include "vfi/fusion.hpp"
#include "vfi/phantom.hpp"
#include "vfi/pipeline.hpp"

using namespace vfi;

namespace {

PixelGrid small_grid() { return PixelGrid::from_extent(-1e-3, 1e-3, 5e-3, 20e-3, 1e-3, 1e-3); }

VelocityField constant_field(const PixelGrid& g, double vx, double vz, double quality = 1.0) {
  VelocityField f = VelocityField::zeros(g);
  for (size_t p = 0; p < g.size(); ++p) {
    f.vx[p] = vx;
    f.vz[p] = vz;
    f.computed[p] = 1;
    f.valid[p] = 1;
    f.quality[p] = quality;
  }
  return f;
}

}  // namespace

TEST_CASE("fuse: hard depth gate selects the branch per row") {
  const PixelGrid g = small_grid();
  auto shallow = constant_field(g, 0.5, 0.0);
  for (auto& m : shallow.method) m = EstMethod::DirectionalXCorr;
  auto deep = constant_field(g, 0.1, 0.2);
  for (auto& m : deep.method) m = EstMethod::Triangulation;
  const double z_limit = 11.55e-3;

  auto fused = fuse(shallow, deep, z_limit);
  for (int iz = 0; iz < g.nz; ++iz)
    for (int ix = 0; ix < g.nx; ++ix) {
      const size_t p = g.index(ix, iz);
      REQUIRE(fused.computed[p] == 1);
      if (g.z(iz) >= z_limit) {
        CHECK(fused.vx[p] == 0.1);
        CHECK(fused.method[p] == EstMethod::Triangulation);
      } else {
        CHECK(fused.vx[p] == 0.5);
        CHECK(fused.method[p] == EstMethod::DirectionalXCorr);
      }
    }
}

TEST_CASE("fuse: invalid source pixels stay invalid with method none") {
  const PixelGrid g = small_grid();
  auto shallow = constant_field(g, 0.5, 0.0);
  shallow.valid[0] = 0;
  auto deep = constant_field(g, 0.1, 0.2);
  auto fused = fuse(shallow, deep, 11.55e-3);
  CHECK(fused.valid[0] == 0);
  CHECK(fused.method[0] == EstMethod::None);
}

TEST_CASE("fuse: missing coverage is an error") {
  const PixelGrid g = small_grid();
  auto shallow = constant_field(g, 0.5, 0.0);
  auto deep = constant_field(g, 0.1, 0.2);
  deep.computed[g.size() - 1] = 0;  // deepest row not served
  CHECK_THROWS_AS(fuse(shallow, deep, 11.55e-3), ValidationError);

  PixelGrid other = g;
  other.nz -= 1;
  CHECK_THROWS_AS(fuse(shallow, VelocityField::zeros(other), 11.55e-3), ValidationError);
}

TEST_CASE("evaluate: perfect estimates give zero bias and spread") {
  const PixelGrid g = small_grid();
  VesselSpec v;
  v.center_z_m = 8e-3;
  v.radius_m = 2e-3;
  v.peak_velocity_mps = 0.5;
  v.half_length_m = 4e-3;
  auto truth = true_velocity_field(g, {v});

  std::vector<VelocityField> est(3, truth);
  auto m = evaluate(est, truth, 0.5);
  CHECK(m.mean_bias_pct == Catch::Approx(0.0).margin(1e-12));
  CHECK(m.std_pct == Catch::Approx(0.0).margin(1e-12));
  CHECK(m.n_valid > 0);
  REQUIRE(m.per_vessel.size() == 1);
  CHECK(m.per_vessel[0].n_valid == m.n_valid);
}

TEST_CASE("evaluate: known constant error and spread") {
  const PixelGrid g = small_grid();
  VesselSpec v;
  v.center_z_m = 8e-3;
  v.radius_m = 2e-3;
  v.peak_velocity_mps = 0.5;
  v.half_length_m = 4e-3;
  auto truth = true_velocity_field(g, {v});

  // two ensembles straddling truth + 0.05 in vx: mean error 0.05, spread 0.02
  auto lo = truth, hi = truth;
  for (size_t p = 0; p < g.size(); ++p) {
    lo.vx[p] += 0.03;
    hi.vx[p] += 0.07;
  }
  std::vector<VelocityField> est = {lo, hi};
  auto m = evaluate(est, truth, 0.5);
  CHECK(m.mean_bias_pct == Catch::Approx(100.0 * 0.05 / 0.5).margin(1e-9));
  CHECK(m.std_pct == Catch::Approx(100.0 * 0.02 / 0.5).margin(1e-9));
}

TEST_CASE("evaluate: pixels invalid in any ensemble are excluded") {
  const PixelGrid g = small_grid();
  VesselSpec v;
  v.center_z_m = 8e-3;
  v.radius_m = 2e-3;
  v.peak_velocity_mps = 0.5;
  v.half_length_m = 4e-3;
  auto truth = true_velocity_field(g, {v});

  std::vector<VelocityField> est = {truth, truth};
  auto all = evaluate(est, truth, 0.5);
  // invalidate one in-vessel pixel in the second ensemble only
  size_t target = 0;
  for (size_t p = 0; p < g.size(); ++p)
    if (truth.vessel_id[p] >= 0) { target = p; break; }
  est[1].valid[target] = 0;
  auto fewer = evaluate(est, truth, 0.5);
  CHECK(fewer.n_valid == all.n_valid - 1);
}

TEST_CASE("evaluate: validation") {
  const PixelGrid g = small_grid();
  auto truth = VelocityField::zeros(g);
  CHECK_THROWS_AS(evaluate(std::vector<VelocityField>{}, truth, 0.5), ValidationError);
  CHECK_THROWS_AS(evaluate(std::vector<VelocityField>{truth}, truth, 0.0), ValidationError);
  PixelGrid other = g;
  other.nx += 1;
  CHECK_THROWS_AS(evaluate(std::vector<VelocityField>{VelocityField::zeros(other)}, truth, 0.5),
                  ValidationError);
}

TEST_CASE("depth_profile: rows cover the vessel only") {
  const PixelGrid g = small_grid();
  VesselSpec v;
  v.center_z_m = 8e-3;
  v.radius_m = 2e-3;
  v.peak_velocity_mps = 0.5;
  v.half_length_m = 4e-3;
  auto truth = true_velocity_field(g, {v});
  std::vector<VelocityField> est = {truth};
  auto rows = depth_profile(est, truth);
  REQUIRE_FALSE(rows.empty());
  for (const auto& r : rows) {
    CHECK(r.z_m >= v.center_z_m - v.radius_m - g.dz);
    CHECK(r.z_m <= v.center_z_m + v.radius_m + g.dz);
    CHECK(r.v_est_mean == Catch::Approx(r.v_true).margin(1e-12));
    CHECK(r.v_est_std == Catch::Approx(0.0).margin(1e-12));
    CHECK(r.n > 0);
  }
}
