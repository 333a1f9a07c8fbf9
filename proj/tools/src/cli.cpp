#include "hypercal/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "hypercal/calibration.hpp"
#include "hypercal/config.hpp"
#include "hypercal/error.hpp"
#include "hypercal/io.hpp"
#include "hypercal/parallel.hpp"
#include "hypercal/synthdata.hpp"
#include "hypercal/terrain_indices.hpp"
#include "hypercal/whiteref_model.hpp"

namespace hypercal::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSynthSeed = 7;

std::string sample_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%04zu", i);
  return buf;
}

fs::path with_ext(fs::path p, const char* ext) {
  p.replace_extension(ext);
  return p;
}

ProjectConfig config_or_default(const std::string& path) {
  return path.empty() ? ProjectConfig{} : load_config(path);
}

DeviceSpec require_device(const std::optional<fs::path>& path, const char* field) {
  if (!path) {
    throw Error(ErrorCode::configuration, std::string("config has no '") + field + "' device path");
  }
  return io::read_device(*path);
}

std::vector<fs::path> list_samples(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path& p = entry.path();
    if (p.extension() == ".hdr" && p.stem().string().rfind("sample_", 0) == 0) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(ErrorCode::io, "no sample_*.hdr files in '" + dir.string() + "'");
  return out;
}

std::vector<CalibrationSample> load_samples(const fs::path& dir, const DeviceSpec& camera,
                                            const DeviceSpec& spectrometer) {
  std::vector<CalibrationSample> samples;
  for (const fs::path& hdr : list_samples(dir)) {
    const DataCube cube = io::read_cube(hdr);
    const Spectrum spectrum = io::read_spectrum(with_ext(hdr, ".csv"));
    try {
      samples.push_back(synth::to_calibration_sample(cube, spectrum, camera, spectrometer,
                                                     static_cast<double>(samples.size())));
    } catch (const Error& e) {
      throw Error(e.code(), hdr.string() + ": " + e.what());
    }
  }
  return samples;
}

ordered_json metrics_json(const ReconstructionReport& r) {
  ordered_json j;
  j["mse"] = {{"mean", r.mse.mean}, {"std", r.mse.stddev}};
  j["mae"] = {{"mean", r.mae.mean}, {"std", r.mae.stddev}};
  j["sam"] = {{"mean", r.sam.mean}, {"std", r.sam.stddev}};
  j["zero_norm_count"] = r.zero_norm_count;
  j["bytes_per_pixel"] = r.model_size_bytes_per_pixel;
  return j;
}

// --- synth ---------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::uint64_t seed = kDefaultSynthSeed;
  std::size_t samples = 200;
  std::size_t size = 18;
  double snr_db = 40.0;
  double variability = 0.15;
  double dark_level = 0.02;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.size == 0 || a.size % 3 != 0) {
    throw Error(ErrorCode::invalid_argument, "--size must be a positive multiple of 3 (moisture testbed is 3x3 cells)");
  }
  if (a.samples < 10) throw Error(ErrorCode::invalid_argument, "--samples must be >= 10");
  const fs::path root = a.out;
  std::vector<std::string> files;
  auto rel = [&](const fs::path& p) { files.push_back(fs::relative(p, root).generic_string()); };
  auto write_cube = [&](const DataCube& cube, const fs::path& hdr) {
    io::write_cube(cube, hdr);
    rel(hdr);
    rel(io::envi_body_path(hdr));
  };
  auto write_spectrum = [&](const Spectrum& s, const fs::path& p) {
    io::write_spectrum(s, p);
    rel(p);
  };
  for (const char* sub : {"devices", "train/vnir", "train/swir", "scenes"}) {
    fs::create_directories(root / sub);
  }

  const std::array<double, 9> levels = [] {
    std::array<double, 9> l{};
    for (std::size_t k = 0; k < 9; ++k) l[k] = synth::kMaxTestbedRh * static_cast<double>(k) / 8.0;
    return l;
  }();
  // Fixed cell order so RH is not simply increasing across the grid.
  constexpr std::array<std::size_t, 9> kCellOrder = {4, 0, 7, 2, 8, 1, 6, 3, 5};
  std::array<double, 9> rh_levels{};
  for (std::size_t i = 0; i < 9; ++i) rh_levels[i] = levels[kCellOrder[i]];

  std::uint64_t tag = 0;
  auto next_seed = [&] { return mix64(a.seed ^ mix64(++tag)); };

  for (const std::string range : {"vnir", "swir"}) {
    DeviceSpec camera = presets::by_name(range + "_camera");
    DeviceSpec spectrometer = presets::by_name(range + "_spectrometer");
    camera = camera.with_dark(synth::make_dark(camera, a.size, a.size, a.dark_level, next_seed()));
    spectrometer = spectrometer.with_dark(synth::make_dark(spectrometer, 1, 1, a.dark_level, next_seed()));
    const fs::path cam_path = root / "devices" / (range + "_camera.json");
    const fs::path spec_path = root / "devices" / (range + "_spectrometer.json");
    io::write_device(camera, cam_path);
    io::write_device(spectrometer, spec_path);
    rel(cam_path);
    rel(spec_path);

    ordered_json cfg;
    cfg["camera"] = "devices/" + range + "_camera.json";
    cfg["spectrometer"] = "devices/" + range + "_spectrometer.json";
    const fs::path cfg_path = root / ("config_" + range + ".json");
    io::write_text(cfg_path, cfg.dump(2) + "\n");
    rel(cfg_path);

    synth::DatasetOptions opt;
    opt.height = a.size;
    opt.width = a.size;
    opt.samples = a.samples;
    opt.snr_db = a.snr_db;
    opt.variability = a.variability;
    const auto dataset = synth::make_calibration_dataset(camera, spectrometer, opt, next_seed());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const fs::path base = root / "train" / range / sample_stem(i);
      write_cube(dataset[i].cube, with_ext(base, ".hdr"));
      write_spectrum(dataset[i].spectrometer, with_ext(base, ".csv"));
    }

    auto render_scene = [&](synth::SyntheticScene scene, const std::string& name) {
      Spectrum illum = synth::make_illumination(synth::IlluminationKind::solar_like, next_seed(),
                                                {synth::default_fine_grid(), a.variability});
      for (double& v : illum.values()) v *= 0.8;
      scene.illumination = std::move(illum);
      scene.vignette = synth::radial_vignette(a.size, a.size, opt.vignette_strength);
      scene.noise_sigma = synth::noise_sigma_for_snr(
          camera, synth::make_illumination(synth::IlluminationKind::solar_like, 0), scene.vignette,
          a.snr_db);
      const auto rendered = synth::render(scene, camera, spectrometer, camera.base_integration_ms,
                                          spectrometer.base_integration_ms, next_seed());
      write_cube(rendered.cube, root / "scenes" / (name + "_scene.hdr"));
      write_spectrum(rendered.spectrometer, root / "scenes" / (name + "_scene.csv"));
      write_cube(scene.reflectance_truth, root / "scenes" / (name + "_truth.hdr"));
      if (scene.moisture_truth) {
        const fs::path rh = root / "scenes" / (name + "_rh.csv");
        io::write_map_csv(rh, *scene.moisture_truth, a.size, a.size);
        rel(rh);
      }
    };
    synth::SyntheticScene scene;
    scene.reflectance_truth = synth::make_reflectance_scene(a.size, a.size, camera.grid, next_seed());
    render_scene(std::move(scene), range);
    if (range == "swir") {
      render_scene(synth::make_moisture_testbed(rh_levels, camera.grid, a.size / 3), "moisture");
    }
  }

  std::sort(files.begin(), files.end());
  ordered_json manifest;
  manifest["generator"] = "hypercal synth";
  manifest["seed"] = a.seed;
  manifest["samples"] = a.samples;
  manifest["height"] = a.size;
  manifest["width"] = a.size;
  manifest["snr_db"] = a.snr_db;
  manifest["illumination_variability"] = a.variability;
  manifest["dark_level"] = a.dark_level;
  manifest["sample_interval_s"] = synth::DatasetOptions{}.sample_interval_s;
  manifest["start_timestamp"] = synth::DatasetOptions{}.start_timestamp;
  manifest["moisture_rh_levels"] = rh_levels;
  manifest["files"] = files;
  io::write_text(root / "manifest.json", manifest.dump(2) + "\n");
  out << "synth: wrote " << files.size() + 1 << " files to " << root.string() << "\n";
  return 0;
}

// --- train / eval --------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string model;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  ProjectConfig cfg = load_config(a.config);
  if (a.seed) cfg.reseed(*a.seed);
  if (!a.model.empty()) cfg.model_kind = model_kind_from_string(a.model);
  const DeviceSpec camera = require_device(cfg.camera_path, "camera");
  const DeviceSpec spectrometer = require_device(cfg.spectrometer_path, "spectrometer");
  const auto samples = load_samples(a.data, camera, spectrometer);
  const DataSplit parts = split(samples, cfg.split_seed);
  const std::vector<CalibrationSample> train =
      cfg.augment_enabled ? augment(parts.train, cfg.augment_seed, cfg.augment) : parts.train;

  PixelModelBank bank = cfg.model_kind == ModelKind::mlr ? fit_mlr(train)
                                                         : fit_mlp(train, parts.validation, cfg.mlp);
  TrainingMeta meta = bank.meta();
  meta.split_seed = cfg.split_seed;
  meta.augment_replicas = cfg.augment_enabled ? cfg.augment.replicas : 0;
  bank.set_meta(std::move(meta));

  fs::create_directories(a.out);
  const fs::path bank_path = fs::path(a.out) / "bank.hcal";
  save_bank(bank, bank_path);
  const ReconstructionReport report = evaluate(bank, parts.test);

  ordered_json j;
  j["model"] = std::string(to_string(bank.kind()));
  j["height"] = bank.height();
  j["width"] = bank.width();
  j["bands"] = bank.bands();
  j["samples"] = {{"total", samples.size()},
                  {"train", parts.train.size()},
                  {"train_augmented", train.size()},
                  {"validation", parts.validation.size()},
                  {"test", parts.test.size()}};
  j["split_seed"] = cfg.split_seed;
  j["ridge_lambda"] = bank.meta().ridge_lambda;
  j["test_metrics"] = metrics_json(report);
  io::write_text(fs::path(a.out) / "train_report.json", j.dump(2) + "\n");
  out << "train: " << to_string(bank.kind()) << " bank " << bank.height() << "x" << bank.width()
      << "x" << bank.bands() << " -> " << bank_path.string() << " (test SAM "
      << io::format_double(report.sam.mean) << " rad)\n";
  return 0;
}

struct EvalArgs {
  std::string config;
  std::string bank;
  std::string data;
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const ProjectConfig cfg = load_config(a.config);
  const DeviceSpec camera = require_device(cfg.camera_path, "camera");
  const DeviceSpec spectrometer = require_device(cfg.spectrometer_path, "spectrometer");
  const PixelModelBank bank = load_bank(a.bank);
  const auto samples = load_samples(a.data, camera, spectrometer);
  const SplitIndices idx = split_indices(samples.size(), bank.meta().split_seed);
  std::vector<CalibrationSample> test;
  for (std::size_t i : idx.test) test.push_back(samples[i]);
  const ReconstructionReport report = evaluate(bank, test);

  const std::string name(to_string(bank.kind()));
  const fs::path dir = a.out;
  fs::create_directories(dir);
  io::write_text(dir / "eval_table.csv",
                 std::string(io::kReportTableHeader) + "\n" + io::report_table_row(report, name));
  io::write_map_csv(dir / "pixel_mse.csv", report.pixel_mse, report.height, report.width);
  io::write_map_csv(dir / "pixel_mae.csv", report.pixel_mae, report.height, report.width);
  io::write_map_csv(dir / "pixel_sam.csv", report.pixel_sam, report.height, report.width);
  const std::string summary = io::report_summary(report, name);
  char timing[96];
  std::snprintf(timing, sizeof timing, "inference: %.3f s for %zu spectra\n",
                report.inference_seconds, report.samples);
  io::write_text(dir / "eval_summary.txt", summary + timing);
  out << summary;
  return 0;
}

// --- calibrate -----------------------------------------------------------------

struct CalibrateArgs {
  std::string config;
  std::string bank;
  std::string cube;
  std::string spectrum;
  std::string out;
  std::string name = "reflectance";
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  const ProjectConfig cfg = load_config(a.config);
  auto bank = std::make_shared<const PixelModelBank>(load_bank(a.bank));
  CalibrationContext ctx = CalibrationContext::make(require_device(cfg.camera_path, "camera"),
                                                    require_device(cfg.spectrometer_path, "spectrometer"),
                                                    bank);
  ctx.clip_max = cfg.clip_max;
  ctx.epsilon_denom = cfg.epsilon_denom;
  ctx.dark_denominator = cfg.dark_denominator;
  ctx.validate();
  const DataCube reflectance = calibrate(ctx, io::read_cube(a.cube), io::read_spectrum(a.spectrum));
  fs::create_directories(a.out);
  const fs::path hdr = fs::path(a.out) / (a.name + ".hdr");
  io::write_cube(reflectance, hdr);
  out << "calibrate: wrote " << hdr.string() << "\n";
  return 0;
}

// --- indices -------------------------------------------------------------------

struct NdviArgs {
  std::string config;
  std::string cube;
  std::string out;
};

int cmd_ndvi(const NdviArgs& a, std::ostream& out) {
  const ProjectConfig cfg = config_or_default(a.config);
  const DataCube cube = io::read_cube(a.cube);
  const IndexMap map = normalized_difference(cube, cfg.ndvi_nm.first, cfg.ndvi_nm.second, IndexKind::ndvi);
  const BinaryMask mask = otsu_threshold(map, cfg.otsu_bins);
  const fs::path dir = a.out;
  fs::create_directories(dir);
  io::write_map_csv(dir / "ndvi.csv", map.values, map.height, map.width);
  io::write_png_gray(dir / "ndvi.png", map.values, map.height, map.width, -1.0, 1.0);
  std::vector<double> mask_values(mask.mask.size());
  for (std::size_t i = 0; i < mask_values.size(); ++i) mask_values[i] = mask.mask[i] ? 1.0 : 0.0;
  io::write_map_csv(dir / "ndvi_mask.csv", mask_values, mask.height, mask.width);
  io::write_mask_png(dir / "ndvi_mask.png", mask.mask, mask.height, mask.width);
  out << "ndvi: threshold=" << io::format_double(mask.threshold) << " above=" << mask.count()
      << " flagged=" << map.flagged_pixels << "\n";
  return 0;
}

std::vector<double> read_rh(const std::string& path, const DataCube& cube) {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> rh = io::read_map_csv(path, h, w);
  if (h != cube.height() || w != cube.width()) {
    throw Error(ErrorCode::shape_mismatch, path + ": RH map is " + std::to_string(h) + "x" +
                                               std::to_string(w) + ", cube is " +
                                               std::to_string(cube.height()) + "x" +
                                               std::to_string(cube.width()));
  }
  return rh;
}

struct SmcArgs {
  std::string config;
  std::string cube;
  std::string rh_map;
  std::string model;
  std::string out;
};

SmcRegression smc_from_json(const std::string& path) {
  try {
    const auto j = nlohmann::json::parse(io::read_text(path));
    SmcRegression reg;
    reg.slope = j.at("slope").get<double>();
    reg.intercept = j.at("intercept").get<double>();
    reg.r_squared = j.value("r_squared", 0.0);
    reg.residual_std = j.value("residual_std", 0.0);
    reg.points = j.value("points", std::size_t{0});
    const auto pair = j.at("band_pair_nm").get<std::vector<double>>();
    if (pair.size() != 2) throw Error(ErrorCode::format, path + ": band_pair_nm needs 2 values");
    reg.band_pair_nm = {pair[0], pair[1]};
    return reg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, path + ": " + e.what());
  }
}

int cmd_smc(const SmcArgs& a, std::ostream& out) {
  if (a.rh_map.empty() == a.model.empty()) {
    throw Error(ErrorCode::invalid_argument, "smc needs exactly one of --rh-map (fit) or --model (apply)");
  }
  const ProjectConfig cfg = config_or_default(a.config);
  const DataCube cube = io::read_cube(a.cube);
  SmcRegression reg;
  const fs::path dir = a.out;
  fs::create_directories(dir);
  if (!a.rh_map.empty()) {
    const std::vector<double> rh = read_rh(a.rh_map, cube);
    const IndexMap index = normalized_difference(cube, cfg.smc_nm.first, cfg.smc_nm.second, IndexKind::smc);
    std::vector<std::pair<double, double>> points(rh.size());
    for (std::size_t i = 0; i < rh.size(); ++i) points[i] = {index.values[i], rh[i]};
    reg = fit_smc(points);
    reg.band_pair_nm = cfg.smc_nm;
    ordered_json j;
    j["slope"] = reg.slope;
    j["intercept"] = reg.intercept;
    j["r_squared"] = reg.r_squared;
    j["residual_std"] = reg.residual_std;
    j["points"] = reg.points;
    j["band_pair_nm"] = {reg.band_pair_nm.first, reg.band_pair_nm.second};
    io::write_text(dir / "smc_model.json", j.dump(2) + "\n");
  } else {
    reg = smc_from_json(a.model);
  }
  const IndexMap rh_map = predict_smc(reg, cube);
  io::write_map_csv(dir / "rh_map.csv", rh_map.values, rh_map.height, rh_map.width);
  io::write_png_gray(dir / "rh_map.png", rh_map.values, rh_map.height, rh_map.width, 0.0, 100.0);
  out << "smc: RH = " << io::format_double(reg.slope) << " * index + "
      << io::format_double(reg.intercept) << " (R^2 " << io::format_double(reg.r_squared) << ")\n";
  return 0;
}

struct BandOptArgs {
  std::string cube;
  std::string rh_map;
  std::string objective = "mean";
};

int cmd_band_opt(const BandOptArgs& a, std::ostream& out) {
  const DataCube cube = io::read_cube(a.cube);
  const std::vector<double> rh = read_rh(a.rh_map, cube);
  const auto [lo, hi] = std::minmax_element(rh.begin(), rh.end());
  if (*lo == *hi) throw Error(ErrorCode::degenerate, a.rh_map + ": RH map has a single level");
  std::vector<std::vector<double>> wet;
  std::vector<std::vector<double>> dry;
  for (std::size_t p = 0; p < rh.size(); ++p) {
    const auto px = cube.pixel(p);
    if (rh[p] == *hi) wet.emplace_back(px.begin(), px.end());
    if (rh[p] == *lo) dry.emplace_back(px.begin(), px.end());
  }
  BandPairObjective objective = BandPairObjective::mean_spectrum;
  if (a.objective == "per-pixel") {
    objective = BandPairObjective::per_pixel;
  } else if (a.objective != "mean") {
    throw Error(ErrorCode::invalid_argument, "--objective must be 'mean' or 'per-pixel'");
  }
  const BandPairResult best = optimize_band_pair(wet, dry, cube.grid(), objective);
  out << "pair_nm=" << io::format_double(best.lambda_i_nm) << "," << io::format_double(best.lambda_j_nm)
      << " bands=" << best.band_i << "," << best.band_j << " score=" << io::format_double(best.score)
      << "\n";
  return 0;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

}  // namespace

std::string error_line(std::string_view code, std::string_view message) {
  return "error code=" + std::string(code) + " message=\"" + escape(message) + "\"";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint spectrometer/camera reflectance calibration and terrain indices"};
  app.name("hypercal");
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic calibration dataset and scenes");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--seed", synth_args.seed, "random seed")->capture_default_str();
  synth->add_option("--samples", synth_args.samples, "white-reference captures per range")->capture_default_str();
  synth->add_option("--size", synth_args.size, "image height and width (multiple of 3)")->capture_default_str();
  synth->add_option("--snr", synth_args.snr_db, "read-noise SNR in dB")->capture_default_str();
  synth->add_option("--variability", synth_args.variability, "illumination shape variation")->capture_default_str();
  std::string synth_config;
  synth->add_option("--config", synth_config, "unused; accepted for a uniform interface");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit a per-pixel white-reference model bank");
  train->add_option("--config", train_args.config, "project config JSON")->required();
  train->add_option("--data", train_args.data, "directory of sample_*.hdr/.csv captures")->required();
  train->add_option("--out", train_args.out, "output directory")->required();
  train->add_option("--seed", train_args.seed, "overrides the config seeds");
  train->add_option("--model", train_args.model, "mlr or mlp (overrides the config)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "reconstruction error statistics on the held-out split");
  eval->add_option("--config", eval_args.config, "project config JSON")->required();
  eval->add_option("--bank", eval_args.bank, "model bank file")->required();
  eval->add_option("--data", eval_args.data, "directory of sample_*.hdr/.csv captures")->required();
  eval->add_option("--out", eval_args.out, "output directory")->required();

  CalibrateArgs cal_args;
  auto* cal = app.add_subcommand("calibrate", "raw cube + spectrometer reading -> reflectance cube");
  cal->add_option("--config", cal_args.config, "project config JSON")->required();
  cal->add_option("--bank", cal_args.bank, "model bank file")->required();
  cal->add_option("--cube", cal_args.cube, "raw ENVI header")->required();
  cal->add_option("--spectrum", cal_args.spectrum, "raw spectrometer CSV")->required();
  cal->add_option("--out", cal_args.out, "output directory")->required();
  cal->add_option("--name", cal_args.name, "output stem")->capture_default_str();

  NdviArgs ndvi_args;
  auto* ndvi_cmd = app.add_subcommand("ndvi", "NDVI map and Otsu vegetation mask");
  ndvi_cmd->add_option("--cube", ndvi_args.cube, "reflectance ENVI header")->required();
  ndvi_cmd->add_option("--out", ndvi_args.out, "output directory")->required();
  ndvi_cmd->add_option("--config", ndvi_args.config, "project config JSON");

  SmcArgs smc_args;
  auto* smc = app.add_subcommand("smc", "fit or apply the soil-moisture regression");
  smc->add_option("--cube", smc_args.cube, "reflectance ENVI header")->required();
  smc->add_option("--out", smc_args.out, "output directory")->required();
  smc->add_option("--rh-map", smc_args.rh_map, "ground-truth RH CSV (fit mode)");
  smc->add_option("--model", smc_args.model, "smc_model.json (apply mode)");
  smc->add_option("--config", smc_args.config, "project config JSON");

  BandOptArgs band_args;
  auto* band = app.add_subcommand("band-opt", "search the band pair separating wet from dry pixels");
  band->add_option("--cube", band_args.cube, "reflectance ENVI header")->required();
  band->add_option("--rh-map", band_args.rh_map, "RH CSV; extreme levels define wet and dry")->required();
  band->add_option("--objective", band_args.objective, "mean or per-pixel")->capture_default_str();
  std::string band_config;
  band->add_option("--config", band_config, "unused; accepted for a uniform interface");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(synth_args, out);
    if (train->parsed()) return cmd_train(train_args, out);
    if (eval->parsed()) return cmd_eval(eval_args, out);
    if (cal->parsed()) return cmd_calibrate(cal_args, out);
    if (ndvi_cmd->parsed()) return cmd_ndvi(ndvi_args, out);
    if (smc->parsed()) return cmd_smc(smc_args, out);
    if (band->parsed()) return cmd_band_opt(band_args, out);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_line("usage", e.what()) << "\n";
    return 2;
  } catch (const Error& e) {
    err << error_line(to_string(e.code()), e.what()) << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << error_line("io", e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << error_line("internal", e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hypercal::cli
