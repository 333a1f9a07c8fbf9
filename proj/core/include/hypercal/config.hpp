#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "hypercal/calibration.hpp"
#include "hypercal/whiteref_model.hpp"

namespace hypercal {

/// Project configuration, stored as JSON. Every section and key is optional;
/// unknown keys are rejected and device paths are resolved against the
/// config file's directory and must exist.
///
///   {
///     "camera": "devices/vnir_camera.json",
///     "spectrometer": "devices/vnir_spectrometer.json",
///     "model": {"kind": "mlr", "alpha": 0.1, "max_epochs": 1000, "patience": 10,
///               "min_delta": 1e-4, "learning_rate": 1e-3, "max_restarts": 3},
///     "augment": {"enabled": true, "replicas": 3, "max_scale": 0.1, "zero_probability": 0.1},
///     "calibration": {"clip_max": 1.5, "epsilon_denom": 1e-6,
///                     "dark_denominator": "model_is_dark_free"},
///     "indices": {"ndvi_nm": [901, 661], "smc_nm": [1300, 1119], "otsu_bins": 256},
///     "seeds": {"split": 1, "augment": 2, "train": 3}
///   }
struct ProjectConfig {
  std::optional<std::filesystem::path> camera_path;
  std::optional<std::filesystem::path> spectrometer_path;

  ModelKind model_kind = ModelKind::mlr;
  MlpHyperparameters mlp;

  bool augment_enabled = true;
  AugmentOptions augment;

  double clip_max = 1.5;
  double epsilon_denom = 1e-6;
  DarkDenominator dark_denominator = DarkDenominator::model_is_dark_free;

  std::pair<double, double> ndvi_nm{901.0, 661.0};
  std::pair<double, double> smc_nm{1300.0, 1119.0};
  std::size_t otsu_bins = 256;

  std::uint64_t split_seed = 1;
  std::uint64_t augment_seed = 2;
  std::uint64_t train_seed = 3;

  /// Re-derives every seed from one value (the CLI --seed flag).
  void reseed(std::uint64_t seed);
};

std::string_view to_string(DarkDenominator mode) noexcept;
DarkDenominator dark_denominator_from_string(std::string_view text);

/// `base_dir` resolves relative device paths.
ProjectConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           const std::string& source = "<memory>");
ProjectConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ProjectConfig& config);

}  // namespace hypercal
