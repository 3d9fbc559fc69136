#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vfi/fusion.hpp"
#include "vfi/params.hpp"
#include "vfi/pipeline.hpp"
#include "vfi/rfsynth.hpp"

namespace vfi {

using json = nlohmann::ordered_json;

inline std::string hash_hex(uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << h;
  return os.str();
}

// --- flat float32 tensor + JSON sidecar ------------------------------------

inline void write_tensor(const std::string& path_base, const std::vector<int>& dims,
                         const std::vector<float>& data, const json& extra) {
  std::ofstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot write " + path_base + ".bin");
  bin.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!bin) throw IoError("short write to " + path_base + ".bin");

  json header = extra;
  header["dtype"] = "float32_le";
  header["dims"] = dims;
  std::ofstream hdr(path_base + ".json");
  if (!hdr) throw IoError("cannot write " + path_base + ".json");
  hdr << header.dump(2) << "\n";
}

inline std::vector<float> read_tensor(const std::string& path_base, json* header_out) {
  std::ifstream hdr(path_base + ".json");
  if (!hdr) throw IoError("cannot open " + path_base + ".json");
  json header;
  try {
    hdr >> header;
  } catch (const std::exception& e) {
    throw IoError(std::string("malformed tensor header: ") + e.what());
  }
  size_t count = 1;
  for (int d : header.at("dims").get<std::vector<int>>()) count *= static_cast<size_t>(d);
  std::ifstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot open " + path_base + ".bin");
  std::vector<float> data(count);
  bin.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<size_t>(bin.gcount()) != count * sizeof(float))
    throw IoError("truncated tensor data: " + path_base + ".bin");
  if (header_out) *header_out = header;
  return data;
}

inline void save_channel_data(const std::string& path_base, const ChannelData& data,
                              uint64_t cfg_hash) {
  std::vector<float> f(data.samples.begin(), data.samples.end());
  json extra;
  extra["kind"] = "channel_data";
  extra["config_hash"] = hash_hex(cfg_hash);
  extra["dt_s"] = 1.0 / data.fs_hz;
  write_tensor(path_base, {data.frames, data.elements, data.fast_samples}, f, extra);
}

inline ChannelData load_channel_data(const std::string& path_base, uint64_t expected_hash) {
  json header;
  auto f = read_tensor(path_base, &header);
  if (header.value("kind", "") != std::string("channel_data"))
    throw IoError("not a channel-data tensor: " + path_base);
  if (header.value("config_hash", "") != hash_hex(expected_hash))
    throw IoError("config hash mismatch for " + path_base +
                  " (stale data for this configuration)");
  const auto dims = header.at("dims").get<std::vector<int>>();
  ChannelData d = ChannelData::zeros(dims.at(0), dims.at(1), dims.at(2),
                                     1.0 / header.at("dt_s").get<double>());
  std::copy(f.begin(), f.end(), d.samples.begin());
  return d;
}

// Beamformed ensembles reuse the tensor format with interleaved re/im.
inline void save_beamformed(const std::string& path_base, const BeamformedEnsemble& e,
                            uint64_t cfg_hash) {
  std::vector<float> f;
  f.reserve(e.values.size() * 2);
  for (const auto& v : e.values) {
    f.push_back(static_cast<float>(v.real()));
    f.push_back(static_cast<float>(v.imag()));
  }
  json extra;
  extra["kind"] = "beamformed";
  extra["config_hash"] = hash_hex(cfg_hash);
  extra["branch"] = static_cast<int>(e.branch);
  extra["steer_alpha_deg"] = e.steer_alpha_deg;
  write_tensor(path_base, {e.frames, e.n_samples, 2}, f, extra);
}

// --- CSV -------------------------------------------------------------------

inline void write_field_csv(const std::string& path, const VelocityField& f,
                            uint64_t cfg_hash) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# config_hash=" << hash_hex(cfg_hash) << "\n";
  out << "x_m,z_m,vx_mps,vz_mps,method,quality,valid\n";
  out << std::setprecision(9);
  const PixelGrid& g = f.grid;
  for (int iz = 0; iz < g.nz; ++iz)
    for (int ix = 0; ix < g.nx; ++ix) {
      const size_t p = g.index(ix, iz);
      if (!f.computed[p]) continue;
      out << g.x(ix) << ',' << g.z(iz) << ',' << f.vx[p] << ',' << f.vz[p] << ','
          << to_string(f.method[p]) << ',' << f.quality[p] << ','
          << static_cast<int>(f.valid[p]) << "\n";
    }
}

inline void write_phantom_csv(const std::string& path, const ScattererField& f) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "x_m,z_m,amplitude,vessel_id\n";
  out << std::setprecision(9);
  for (size_t i = 0; i < f.size(); ++i)
    out << f.x_m[i] << ',' << f.z_m[i] << ',' << f.amplitude[i] << ','
        << static_cast<int>(f.vessel_id[i]) << "\n";
}

inline void write_profile_csv(const std::string& path,
                              const std::vector<DepthProfileRow>& rows, uint64_t cfg_hash) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# config_hash=" << hash_hex(cfg_hash) << "\n";
  out << "z_m,v_true,v_est_mean,v_est_std,n\n";
  out << std::setprecision(9);
  for (const auto& r : rows)
    out << r.z_m << ',' << r.v_true << ',' << r.v_est_mean << ',' << r.v_est_std << ','
        << r.n << "\n";
}

// --- metrics JSON ----------------------------------------------------------

inline json metrics_to_json(const MethodResult& mr, double z_limit_m, uint64_t seed,
                            uint64_t cfg_hash) {
  json j;
  j["method"] = to_string(mr.method);
  j["bias_pct"] = mr.metrics.mean_bias_pct;
  j["std_pct"] = mr.metrics.std_pct;
  j["n_valid"] = mr.metrics.n_valid;
  j["z_limit_m"] = z_limit_m;
  j["seed"] = seed;
  j["config_hash"] = hash_hex(cfg_hash);
  j["per_vessel"] = json::array();
  for (const auto& v : mr.metrics.per_vessel) {
    json vj;
    vj["vessel_id"] = v.vessel_id;
    vj["bias_pct"] = v.mean_bias_pct;
    vj["std_pct"] = v.std_pct;
    vj["n_valid"] = v.n_valid;
    j["per_vessel"].push_back(vj);
  }
  j["profile"] = json::array();
  for (const auto& r : mr.profile)
    j["profile"].push_back({r.z_m, r.v_true, r.v_est_mean, r.v_est_std, r.n});
  return j;
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

// --- scenario files --------------------------------------------------------

inline json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["vessels"] = json::array();
  for (const auto& v : sc.vessels)
    j["vessels"].push_back({{"center_x_m", v.center_x_m},
                            {"center_z_m", v.center_z_m},
                            {"radius_m", v.radius_m},
                            {"inclination_deg", v.inclination_deg},
                            {"peak_velocity_mps", v.peak_velocity_mps},
                            {"half_length_m", v.half_length_m}});
  j["grid_x_min_m"] = sc.grid_x_min_m;
  j["grid_x_max_m"] = sc.grid_x_max_m;
  j["grid_z_min_m"] = sc.grid_z_min_m;
  j["grid_z_max_m"] = sc.grid_z_max_m;
  j["scatterer_density_per_mm2"] = sc.scatterer_density_per_mm2;
  j["background_density_per_mm2"] = sc.background_density_per_mm2;
  j["background_margin_m"] = sc.background_margin_m;
  j["background_amplitude"] = sc.background_amplitude;
  if (sc.snr_db) j["snr_db"] = *sc.snr_db;
  j["clutter_n_cut"] = sc.clutter_n_cut;
  j["quality_threshold"] = sc.quality_threshold;
  if (sc.v_max_mps > 0.0) j["v_max_mps"] = sc.v_max_mps;
  return j;
}

inline Scenario scenario_from_json(const json& j) {
  Scenario sc;
  sc.name = j.value("name", "custom");
  sc.vessels.clear();
  for (const auto& vj : j.at("vessels")) {
    VesselSpec v;
    v.center_x_m = vj.at("center_x_m").get<double>();
    v.center_z_m = vj.at("center_z_m").get<double>();
    v.radius_m = vj.at("radius_m").get<double>();
    v.inclination_deg = vj.value("inclination_deg", 0.0);
    v.peak_velocity_mps = vj.at("peak_velocity_mps").get<double>();
    v.half_length_m = vj.value("half_length_m", 6e-3);
    v.validate();
    sc.vessels.push_back(v);
  }
  sc.grid_x_min_m = j.value("grid_x_min_m", sc.grid_x_min_m);
  sc.grid_x_max_m = j.value("grid_x_max_m", sc.grid_x_max_m);
  sc.grid_z_min_m = j.value("grid_z_min_m", sc.grid_z_min_m);
  sc.grid_z_max_m = j.value("grid_z_max_m", sc.grid_z_max_m);
  sc.scatterer_density_per_mm2 = j.value("scatterer_density_per_mm2", sc.scatterer_density_per_mm2);
  sc.background_density_per_mm2 =
      j.value("background_density_per_mm2", sc.background_density_per_mm2);
  sc.background_margin_m = j.value("background_margin_m", sc.background_margin_m);
  sc.background_amplitude = j.value("background_amplitude", sc.background_amplitude);
  if (j.contains("snr_db")) sc.snr_db = j.at("snr_db").get<double>();
  sc.clutter_n_cut = j.value("clutter_n_cut", sc.clutter_n_cut);
  sc.quality_threshold = j.value("quality_threshold", sc.quality_threshold);
  sc.v_max_mps = j.value("v_max_mps", 0.0);
  return sc;
}

// Accepts either a built-in scenario name or a path to a scenario JSON file.
inline Scenario load_scenario(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path)) return scenario_from_json(load_json(name_or_path));
  return named_scenario(name_or_path);
}

// --- run manifest ----------------------------------------------------------

struct RunManifest {
  uint64_t cfg_hash = 0;
  uint64_t seed = 0;
  std::string version = "0.1.0";
  std::vector<std::pair<std::string, double>> stage_ms;
  std::vector<std::string> outputs;

  void save(const std::string& path) const {
    json j;
    j["config_hash"] = hash_hex(cfg_hash);
    j["seed"] = seed;
    j["version"] = version;
    j["stages"] = json::array();
    for (const auto& [name, ms] : stage_ms) j["stages"].push_back({{"name", name}, {"ms", ms}});
    j["outputs"] = outputs;
    write_json(path, j);
  }
};

}  // namespace vfi
