// Command-line front end for the vector flow imaging toolkit: simulate RF
// channel data, run the estimation branches, and summarize metrics.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "vfi/io.hpp"
#include "vfi/pipeline.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset = "paper";
  std::string scenario = "two_vessel";
  std::string out_dir = "out";
  uint64_t seed = 1;
  int threads = 1;
  int ensembles_override = 0;
  int frames_override = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_scenario = true) {
  cmd->add_option("--config", o.config_path, "config file (key = value); overrides --preset");
  cmd->add_option("--preset", o.preset, "parameter preset")
      ->check(CLI::IsMember({"desk", "paper"}));
  if (with_scenario)
    cmd->add_option("--scenario", o.scenario, "built-in scenario name or scenario JSON path");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "master RNG seed");
  cmd->add_option("--threads", o.threads, "worker threads for data-parallel stages")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--ensembles", o.ensembles_override, "override ensemble count");
  cmd->add_option("--frames", o.frames_override, "override frames per ensemble");
}

vfi::Config resolve_config(const CommonOpts& o) {
  vfi::Config cfg = o.config_path.empty()
                        ? (o.preset == "desk" ? vfi::desk_config() : vfi::paper_config())
                        : vfi::load_config(o.config_path);
  if (o.ensembles_override > 0) cfg.acq.ensembles = o.ensembles_override;
  if (o.frames_override > 0) cfg.acq.frames_per_ensemble = o.frames_override;
  cfg.derive_and_validate();
  return cfg;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string ensemble_base(const std::string& dir, int e) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ensemble_%03d", e);
  return (fs::path(dir) / buf).string();
}

int cmd_simulate(const CommonOpts& o, bool dump_phantom) {
  const vfi::Config cfg = resolve_config(o);
  const vfi::Scenario sc = vfi::load_scenario(o.scenario);
  const uint64_t h = vfi::config_hash(cfg);
  fs::create_directories(o.out_dir);
  if (!fs::is_directory(o.out_dir))
    throw vfi::IoError("cannot create output directory: " + o.out_dir);

  vfi::RunManifest manifest;
  manifest.cfg_hash = h;
  manifest.seed = o.seed;

  auto t0 = Clock::now();
  const auto ensembles = vfi::simulate_ensembles(cfg, sc, o.seed);
  manifest.stage_ms.emplace_back("simulate", ms_since(t0));

  t0 = Clock::now();
  for (size_t e = 0; e < ensembles.size(); ++e) {
    const std::string base = ensemble_base(o.out_dir, static_cast<int>(e));
    vfi::save_channel_data(base, ensembles[e], h);
    manifest.outputs.push_back(base + ".bin");
    manifest.outputs.push_back(base + ".json");
  }
  const std::string sc_path = (fs::path(o.out_dir) / "scenario.json").string();
  vfi::write_json(sc_path, vfi::scenario_to_json(sc));
  manifest.outputs.push_back(sc_path);
  if (dump_phantom) {
    auto field = vfi::seed_scatterers(sc.vessels, sc.scatterer_density_per_mm2,
                                      vfi::derive_seed(o.seed, 1000));
    const std::string p = (fs::path(o.out_dir) / "phantom_e000.csv").string();
    vfi::write_phantom_csv(p, field);
    manifest.outputs.push_back(p);
  }
  manifest.stage_ms.emplace_back("write", ms_since(t0));
  manifest.save((fs::path(o.out_dir) / "run_manifest.json").string());
  std::cout << "wrote " << ensembles.size() << " ensembles ("
            << cfg.acq.frames_per_ensemble << " frames x " << cfg.array.num_elements
            << " channels) to " << o.out_dir << "\n";
  return 0;
}

std::vector<vfi::Method> parse_methods(const std::string& method, bool compare_all) {
  if (compare_all)
    return {vfi::Method::Directional, vfi::Method::Stdmr, vfi::Method::Fusion};
  if (method == "directional") return {vfi::Method::Directional};
  if (method == "stdmr") return {vfi::Method::Stdmr};
  if (method == "fusion") return {vfi::Method::Fusion};
  throw vfi::ValidationError("unknown method '" + method + "'");
}

int cmd_estimate(const CommonOpts& o, const std::string& in_dir, const std::string& method,
                 bool compare_all) {
  const vfi::Config cfg = resolve_config(o);
  const uint64_t h = vfi::config_hash(cfg);
  if (!fs::is_directory(in_dir)) throw vfi::IoError("input directory not found: " + in_dir);

  // scenario and seed travel with the simulated data
  vfi::Scenario sc = vfi::load_scenario(o.scenario);
  const std::string sc_path = (fs::path(in_dir) / "scenario.json").string();
  if (fs::exists(sc_path)) sc = vfi::scenario_from_json(vfi::load_json(sc_path));
  uint64_t seed = o.seed;
  const std::string mf_path = (fs::path(in_dir) / "run_manifest.json").string();
  if (fs::exists(mf_path)) seed = vfi::load_json(mf_path).value("seed", o.seed);

  std::vector<vfi::ChannelData> ensembles;
  for (int e = 0;; ++e) {
    const std::string base = ensemble_base(in_dir, e);
    if (!fs::exists(base + ".json")) break;
    ensembles.push_back(vfi::load_channel_data(base, h));
  }
  if (ensembles.empty()) throw vfi::IoError("no channel data found in " + in_dir);

  fs::create_directories(o.out_dir);
  vfi::RunManifest manifest;
  manifest.cfg_hash = h;
  manifest.seed = seed;

  auto t0 = Clock::now();
  const auto methods = parse_methods(method, compare_all);
  const auto result = vfi::estimate_pipeline(cfg, sc, ensembles, methods, o.threads);
  manifest.stage_ms.emplace_back("estimate", ms_since(t0));

  for (const auto& mr : result.methods) {
    const std::string tag = vfi::to_string(mr.method);
    const std::string mpath = (fs::path(o.out_dir) / ("metrics_" + tag + ".json")).string();
    vfi::write_json(mpath, vfi::metrics_to_json(mr, result.z_limit_m, seed, h));
    manifest.outputs.push_back(mpath);
    for (size_t e = 0; e < mr.fields.size(); ++e) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "field_%s_e%03zu.csv", tag.c_str(), e);
      const std::string fpath = (fs::path(o.out_dir) / buf).string();
      vfi::write_field_csv(fpath, mr.fields[e], h);
      manifest.outputs.push_back(fpath);
    }
    std::cout << tag << ": bias " << mr.metrics.mean_bias_pct << "% std "
              << mr.metrics.std_pct << "% (n=" << mr.metrics.n_valid << ")\n";
  }
  manifest.save((fs::path(o.out_dir) / "run_manifest.json").string());
  return 0;
}

int cmd_report(const std::vector<std::string>& metric_files, const std::string& out_dir) {
  if (metric_files.empty()) throw vfi::ValidationError("report: no metrics files given");
  std::vector<vfi::json> loaded;
  std::string hash;
  for (const auto& path : metric_files) {
    auto j = vfi::load_json(path);
    if (!j.contains("method") || !j.contains("bias_pct"))
      throw vfi::IoError("malformed metrics file: " + path);
    const std::string h = j.value("config_hash", "");
    if (hash.empty()) hash = h;
    else if (h != hash)
      throw vfi::ValidationError("report: mixed config hashes across metrics files");
    loaded.push_back(std::move(j));
  }

  std::printf("%-22s %10s %10s %8s\n", "method", "bias %", "std %", "n");
  for (const auto& j : loaded)
    std::printf("%-22s %10.2f %10.2f %8zu\n", j["method"].get<std::string>().c_str(),
                j["bias_pct"].get<double>(), j["std_pct"].get<double>(),
                j["n_valid"].get<size_t>());

  fs::create_directories(out_dir);
  for (const auto& j : loaded) {
    std::vector<vfi::DepthProfileRow> rows;
    for (const auto& r : j.value("profile", vfi::json::array())) {
      vfi::DepthProfileRow row;
      row.z_m = r.at(0).get<double>();
      row.v_true = r.at(1).get<double>();
      row.v_est_mean = r.at(2).get<double>();
      row.v_est_std = r.at(3).get<double>();
      row.n = r.at(4).get<size_t>();
      rows.push_back(row);
    }
    const std::string p =
        (fs::path(out_dir) / ("profile_" + j["method"].get<std::string>() + ".csv")).string();
    uint64_t h = 0;
    if (!hash.empty()) h = std::stoull(hash, nullptr, 16);
    vfi::write_profile_csv(p, rows, h);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depth-aware fusion vector flow imaging toolkit"};
  app.require_subcommand(1);

  CommonOpts sim_opts;
  bool dump_phantom = false;
  auto* sim = app.add_subcommand("simulate", "synthesize RF channel data for a scenario");
  add_common(sim, sim_opts);
  sim->add_flag("--dump-phantom", dump_phantom, "also write the initial scatterer field CSV");

  CommonOpts est_opts;
  std::string in_dir = "out";
  std::string method = "fusion";
  bool compare_all = false;
  auto* est = app.add_subcommand("estimate", "beamform + estimate velocities from channel data");
  add_common(est, est_opts);
  est->add_option("--in", in_dir, "directory with simulated channel data");
  est->add_option("--method", method, "estimation branch")
      ->check(CLI::IsMember({"directional", "stdmr", "fusion"}));
  est->add_flag("--compare-all", compare_all, "run all three methods");

  std::vector<std::string> metric_files;
  std::string report_out = ".";
  auto* rep = app.add_subcommand("report", "tabulate metrics files and emit profile CSVs");
  rep->add_option("metrics", metric_files, "metrics JSON files")->required();
  rep->add_option("--out", report_out, "directory for profile CSVs");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(sim_opts, dump_phantom);
    if (est->parsed()) return cmd_estimate(est_opts, in_dir, method, compare_all);
    return cmd_report(metric_files, report_out);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  } catch (const vfi::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const vfi::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const vfi::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const vfi::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
