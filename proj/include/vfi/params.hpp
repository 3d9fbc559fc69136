#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vfi/errors.hpp"

namespace vfi {

// Linear transducer array, lateral axis x, element centers symmetric about 0.
struct ArrayGeometry {
  int num_elements = 128;
  double pitch_m = 0.1925e-3;
  double kerf_m = 0.01e-3;
  double element_height_m = 5e-3;  // stored only; the model is 2-D (x-z)
  std::vector<double> element_x;   // derived, strictly increasing, mean 0

  void derive() {
    element_x.resize(static_cast<size_t>(num_elements));
    const double c0 = 0.5 * (num_elements - 1);
    for (int j = 0; j < num_elements; ++j)
      element_x[static_cast<size_t>(j)] = (j - c0) * pitch_m;
  }

  double aperture_half_width() const {
    return 0.5 * (num_elements - 1) * pitch_m;
  }
};

struct AcquisitionParams {
  double tx_center_frequency_hz = 8e6;
  double sound_speed_mps = 1540.0;
  double sampling_frequency_hz = 100e6;
  double prf_hz = 15.6e3;
  int frames_per_ensemble = 16;
  int ensembles = 10;

  double wavelength_m() const { return sound_speed_mps / tx_center_frequency_hz; }
  double frame_dt() const { return 1.0 / prf_hz; }
};

enum class Apodization { Hanning, Rectangular };

struct BeamformConfig {
  double f_number = 2.0;
  Apodization apodization = Apodization::Hanning;
  std::vector<double> rx_angles_deg = {6.0, 9.0, 12.0, 15.0};
  double grid_dx_m = 0.1925e-3;
  double grid_dz_m = 0.1e-3;
  double directional_line_spacing_m = 19.25e-6;  // lambda/10 at 8 MHz
};

struct FusionConfig {
  int min_aperture_elements = 30;
  double limiting_depth_m = 0.0;     // derived unless overridden
  bool limiting_depth_overridden = false;
};

// Z_L = F# x receive aperture size.
inline double limiting_depth(double f_number, double aperture_size_m) {
  if (!(f_number > 0.0) || !(aperture_size_m > 0.0))
    throw ValidationError("limiting_depth: arguments must be positive");
  return f_number * aperture_size_m;
}

struct Config {
  ArrayGeometry array;
  AcquisitionParams acq;
  BeamformConfig beamform;
  FusionConfig fusion;

  void derive_and_validate() {
    if (array.num_elements < 2)
      throw ValidationError("num_elements: must be >= 2");
    if (!(array.pitch_m > array.kerf_m) || !(array.kerf_m > 0.0))
      throw ValidationError("pitch_m: require pitch > kerf > 0");
    array.derive();

    if (!(acq.tx_center_frequency_hz > 0.0))
      throw ValidationError("tx_center_frequency_hz: must be > 0");
    if (!(acq.sound_speed_mps > 0.0))
      throw ValidationError("sound_speed_mps: must be > 0");
    if (acq.sampling_frequency_hz < 4.0 * acq.tx_center_frequency_hz)
      throw ValidationError("sampling_frequency_hz: require fs >= 4*f0");
    if (!(acq.prf_hz > 0.0))
      throw ValidationError("prf_hz: must be > 0");
    if (acq.frames_per_ensemble < 2)
      throw ValidationError("frames_per_ensemble: must be >= 2");
    if (acq.ensembles < 1)
      throw ValidationError("ensembles: must be >= 1");

    if (!(beamform.f_number > 0.0))
      throw ValidationError("f_number: must be > 0");
    if (beamform.rx_angles_deg.empty())
      throw ValidationError("rx_angles_deg: must be non-empty");
    for (double a : beamform.rx_angles_deg)
      if (!(a > 0.0) || !(a < 45.0))
        throw ValidationError("rx_angles_deg: angles must lie in (0, 45)");
    if (!std::is_sorted(beamform.rx_angles_deg.begin(), beamform.rx_angles_deg.end()) ||
        std::adjacent_find(beamform.rx_angles_deg.begin(), beamform.rx_angles_deg.end()) !=
            beamform.rx_angles_deg.end())
      throw ValidationError("rx_angles_deg: must be strictly increasing");
    if (!(beamform.grid_dx_m > 0.0) || !(beamform.grid_dz_m > 0.0))
      throw ValidationError("grid_dx_m: grid pitch must be > 0");
    if (!(beamform.directional_line_spacing_m > 0.0))
      throw ValidationError("directional_line_spacing_m: must be > 0");

    if (fusion.min_aperture_elements < 1)
      throw ValidationError("min_aperture_elements: must be >= 1");
    if (!fusion.limiting_depth_overridden) {
      fusion.limiting_depth_m =
          limiting_depth(beamform.f_number, fusion.min_aperture_elements * array.pitch_m);
    }
    if (!(fusion.limiting_depth_m > 0.0))
      throw ValidationError("limiting_depth_m: must be > 0");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw ParseError("");
    return d;
  } catch (...) {
    throw ParseError(key + ": cannot parse '" + v + "' as a number");
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int d = std::stoi(v, &pos);
    if (pos != v.size()) throw ParseError("");
    return d;
  } catch (...) {
    throw ParseError(key + ": cannot parse '" + v + "' as an integer");
  }
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace detail

// Flat key = value config text. '#' starts a comment. SI units unless the key
// carries a _deg suffix.
inline Config parse_config(std::istream& in) {
  Config cfg;
  std::string line;
  int lineno = 0;
  bool have_min_aperture = false;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    using detail::parse_double;
    using detail::parse_int;

    if (key == "num_elements") cfg.array.num_elements = parse_int(key, val);
    else if (key == "pitch_m") cfg.array.pitch_m = parse_double(key, val);
    else if (key == "kerf_m") cfg.array.kerf_m = parse_double(key, val);
    else if (key == "element_height_m") cfg.array.element_height_m = parse_double(key, val);
    else if (key == "tx_center_frequency_hz") cfg.acq.tx_center_frequency_hz = parse_double(key, val);
    else if (key == "sound_speed_mps") cfg.acq.sound_speed_mps = parse_double(key, val);
    else if (key == "sampling_frequency_hz") cfg.acq.sampling_frequency_hz = parse_double(key, val);
    else if (key == "prf_hz") cfg.acq.prf_hz = parse_double(key, val);
    else if (key == "frames_per_ensemble") cfg.acq.frames_per_ensemble = parse_int(key, val);
    else if (key == "ensembles") cfg.acq.ensembles = parse_int(key, val);
    else if (key == "f_number") cfg.beamform.f_number = parse_double(key, val);
    else if (key == "apodization") {
      if (val == "hanning") cfg.beamform.apodization = Apodization::Hanning;
      else if (val == "rectangular") cfg.beamform.apodization = Apodization::Rectangular;
      else throw ParseError("apodization: unknown value '" + val + "'");
    }
    else if (key == "rx_angles_deg") cfg.beamform.rx_angles_deg = detail::parse_double_list(key, val);
    else if (key == "grid_dx_m") cfg.beamform.grid_dx_m = parse_double(key, val);
    else if (key == "grid_dz_m") cfg.beamform.grid_dz_m = parse_double(key, val);
    else if (key == "directional_line_spacing_m")
      cfg.beamform.directional_line_spacing_m = parse_double(key, val);
    else if (key == "min_aperture_elements") {
      cfg.fusion.min_aperture_elements = parse_int(key, val);
      have_min_aperture = true;
    }
    else if (key == "limiting_depth_m") {
      cfg.fusion.limiting_depth_m = parse_double(key, val);
      cfg.fusion.limiting_depth_overridden = true;
    }
    else throw ParseError("unknown key '" + key + "'");
  }
  (void)have_min_aperture;
  cfg.derive_and_validate();
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  return parse_config(in);
}

inline std::string serialize_config(const Config& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "num_elements = " << cfg.array.num_elements << "\n"
      << "pitch_m = " << cfg.array.pitch_m << "\n"
      << "kerf_m = " << cfg.array.kerf_m << "\n"
      << "element_height_m = " << cfg.array.element_height_m << "\n"
      << "tx_center_frequency_hz = " << cfg.acq.tx_center_frequency_hz << "\n"
      << "sound_speed_mps = " << cfg.acq.sound_speed_mps << "\n"
      << "sampling_frequency_hz = " << cfg.acq.sampling_frequency_hz << "\n"
      << "prf_hz = " << cfg.acq.prf_hz << "\n"
      << "frames_per_ensemble = " << cfg.acq.frames_per_ensemble << "\n"
      << "ensembles = " << cfg.acq.ensembles << "\n"
      << "f_number = " << cfg.beamform.f_number << "\n"
      << "apodization = "
      << (cfg.beamform.apodization == Apodization::Hanning ? "hanning" : "rectangular") << "\n";
  out << "rx_angles_deg = ";
  for (size_t i = 0; i < cfg.beamform.rx_angles_deg.size(); ++i)
    out << (i ? "," : "") << cfg.beamform.rx_angles_deg[i];
  out << "\n";
  out << "grid_dx_m = " << cfg.beamform.grid_dx_m << "\n"
      << "grid_dz_m = " << cfg.beamform.grid_dz_m << "\n"
      << "directional_line_spacing_m = " << cfg.beamform.directional_line_spacing_m << "\n"
      << "min_aperture_elements = " << cfg.fusion.min_aperture_elements << "\n";
  if (cfg.fusion.limiting_depth_overridden)
    out << "limiting_depth_m = " << cfg.fusion.limiting_depth_m << "\n";
  return out.str();
}

// FNV-1a over the canonical serialization; used to tie data files to the
// configuration that produced them.
inline uint64_t config_hash(const Config& cfg) {
  const std::string s = serialize_config(cfg);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Table I parameter set.
inline Config paper_config() {
  Config cfg;
  cfg.derive_and_validate();
  return cfg;
}

// Reduced preset for quick runs: fewer elements and ensembles, coarser grid.
inline Config desk_config() {
  Config cfg;
  cfg.array.num_elements = 64;
  cfg.acq.ensembles = 2;
  cfg.derive_and_validate();
  return cfg;
}

}  // namespace vfi
