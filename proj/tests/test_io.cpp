#include <catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "vfi/io.hpp"

using namespace vfi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("vfi_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("tensor: round trip with header") {
  TempDir tmp;
  std::vector<float> data = {1.0f, 2.5f, -3.0f, 0.0f, 4.0f, 5.0f};
  json extra;
  extra["kind"] = "unit";
  write_tensor(tmp.file("t"), {2, 3}, data, extra);

  json header;
  auto back = read_tensor(tmp.file("t"), &header);
  CHECK(back == data);
  CHECK(header["dims"] == std::vector<int>({2, 3}));
  CHECK(header["dtype"] == "float32_le");
  CHECK(header["kind"] == "unit");
}

TEST_CASE("tensor: missing and truncated files") {
  TempDir tmp;
  CHECK_THROWS_AS(read_tensor(tmp.file("absent"), nullptr), IoError);

  json extra;
  write_tensor(tmp.file("t"), {4}, {1.0f, 2.0f, 3.0f, 4.0f}, extra);
  fs::resize_file(tmp.file("t") + ".bin", 8);  // half the payload
  CHECK_THROWS_AS(read_tensor(tmp.file("t"), nullptr), IoError);

  std::ofstream(tmp.file("bad") + ".json") << "{ not json";
  std::ofstream(tmp.file("bad") + ".bin");
  CHECK_THROWS_AS(read_tensor(tmp.file("bad"), nullptr), IoError);
}

TEST_CASE("channel data: round trip and hash check") {
  TempDir tmp;
  auto d = ChannelData::zeros(2, 3, 16, 100e6);
  for (size_t i = 0; i < d.samples.size(); ++i) d.samples[i] = static_cast<double>(i) * 0.5;

  save_channel_data(tmp.file("cd"), d, 0xabcdef12u);
  auto back = load_channel_data(tmp.file("cd"), 0xabcdef12u);
  CHECK(back.frames == 2);
  CHECK(back.elements == 3);
  CHECK(back.fast_samples == 16);
  CHECK(back.fs_hz == Catch::Approx(100e6));
  CHECK(back.samples == d.samples);  // float32 exact for these values

  CHECK_THROWS_WITH(load_channel_data(tmp.file("cd"), 0xdeadbeefu),
                    Catch::Matchers::ContainsSubstring("hash"));
}

TEST_CASE("field CSV: header and row content") {
  TempDir tmp;
  PixelGrid g = PixelGrid::from_extent(0.0, 1e-3, 5e-3, 6e-3, 1e-3, 1e-3);
  auto f = VelocityField::zeros(g);
  f.computed[0] = 1;
  f.valid[0] = 1;
  f.vx[0] = 0.25;
  f.method[0] = EstMethod::Triangulation;
  f.quality[0] = 0.9;

  write_field_csv(tmp.file("f.csv"), f, 0x1234u);
  std::ifstream in(tmp.file("f.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "# config_hash=0000000000001234");
  std::getline(in, line);
  CHECK(line == "x_m,z_m,vx_mps,vz_mps,method,quality,valid");
  std::getline(in, line);
  CHECK(line.find("0.25") != std::string::npos);
  CHECK(line.find("triangulation") != std::string::npos);
  // uncomputed pixels are skipped
  int rows = 1;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1);
}

TEST_CASE("scenario JSON: round trip including optional fields") {
  auto sc = scenario_two_vessel();
  sc.snr_db = 30.0;
  sc.v_max_mps = 1.25;
  auto j = scenario_to_json(sc);
  auto back = scenario_from_json(j);
  CHECK(back.name == sc.name);
  REQUIRE(back.vessels.size() == 2);
  CHECK(back.vessels[1].inclination_deg == 10.0);
  CHECK(back.vessels[1].center_z_m == 22e-3);
  REQUIRE(back.snr_db.has_value());
  CHECK(*back.snr_db == 30.0);
  CHECK(back.v_max_mps == 1.25);
  CHECK(back.quality_threshold == sc.quality_threshold);

  // built-in lookup
  CHECK(load_scenario("shallow_only").vessels.size() == 1);
  CHECK_THROWS_AS(load_scenario("no_such_scenario"), ValidationError);
}

TEST_CASE("scenario JSON: file path wins over name lookup") {
  TempDir tmp;
  auto sc = scenario_deep_only();
  write_json(tmp.file("sc.json"), scenario_to_json(sc));
  auto back = load_scenario(tmp.file("sc.json"));
  CHECK(back.name == "deep_only");
  CHECK(back.grid_z_min_m == sc.grid_z_min_m);
}

TEST_CASE("metrics JSON: expected keys and deterministic dump") {
  MethodResult mr;
  mr.method = Method::Fusion;
  mr.metrics.mean_bias_pct = 5.4;
  mr.metrics.std_pct = 6.2;
  mr.metrics.n_valid = 1234;
  VesselMetrics vm;
  vm.vessel_id = 0;
  vm.mean_bias_pct = 4.0;
  mr.metrics.per_vessel.push_back(vm);
  DepthProfileRow row;
  row.z_m = 8e-3;
  row.v_true = 0.5;
  row.n = 10;
  mr.profile.push_back(row);

  auto j = metrics_to_json(mr, 11.55e-3, 42, 0x99u);
  CHECK(j["method"] == "fusion");
  CHECK(j["bias_pct"] == 5.4);
  CHECK(j["std_pct"] == 6.2);
  CHECK(j["n_valid"] == 1234);
  CHECK(j["z_limit_m"] == 11.55e-3);
  CHECK(j["seed"] == 42);
  CHECK(j["config_hash"] == "0000000000000099");
  REQUIRE(j["per_vessel"].size() == 1);
  CHECK(j["per_vessel"][0]["bias_pct"] == 4.0);
  REQUIRE(j["profile"].size() == 1);
  CHECK(j["profile"][0][1] == 0.5);

  // identical inputs serialize to identical bytes
  CHECK(j.dump(2) == metrics_to_json(mr, 11.55e-3, 42, 0x99u).dump(2));
}

TEST_CASE("run manifest: file contents") {
  TempDir tmp;
  RunManifest m;
  m.cfg_hash = 0x1u;
  m.seed = 7;
  m.stage_ms.emplace_back("simulate", 12.5);
  m.outputs.push_back("a.bin");
  m.save(tmp.file("run_manifest.json"));

  auto j = load_json(tmp.file("run_manifest.json"));
  CHECK(j["config_hash"] == "0000000000000001");
  CHECK(j["seed"] == 7);
  CHECK(j["stages"][0]["name"] == "simulate");
  CHECK(j["outputs"][0] == "a.bin");
}
