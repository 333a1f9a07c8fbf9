#include "hypercal/config.hpp"

#include <algorithm>
#include <initializer_list>

#include <json.hpp>

#include "hypercal/error.hpp"
#include "hypercal/io.hpp"
#include "hypercal/parallel.hpp"

namespace hypercal {
namespace {

using nlohmann::json;

void reject_unknown(const json& object, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  if (!object.is_object()) throw Error(ErrorCode::configuration, where + " must be a JSON object");
  for (const auto& [key, _] : object.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::configuration, "unknown config key '" + where + "." + key + "'");
    }
  }
}

template <typename T>
void read_into(const json& object, const char* key, T& target) {
  if (object.contains(key)) target = object.at(key).get<T>();
}

std::pair<double, double> read_pair(const json& object, const char* key,
                                    std::pair<double, double> fallback) {
  if (!object.contains(key)) return fallback;
  const auto values = object.at(key).get<std::vector<double>>();
  if (values.size() != 2) {
    throw Error(ErrorCode::configuration, std::string("'") + key + "' needs two wavelengths");
  }
  return {values[0], values[1]};
}

std::filesystem::path resolve(const json& object, const char* key, const std::filesystem::path& base) {
  std::filesystem::path p = object.at(key).get<std::string>();
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) {
    throw Error(ErrorCode::configuration,
                std::string("config field '") + key + "' points to missing file '" + p.string() + "'");
  }
  return p;
}

}  // namespace

void ProjectConfig::reseed(std::uint64_t seed) {
  split_seed = mix64(seed ^ 0x5011);
  augment_seed = mix64(seed ^ 0xA061);
  train_seed = mix64(seed ^ 0x7EA1);
  mlp.seed = train_seed;
}

std::string_view to_string(DarkDenominator mode) noexcept {
  return mode == DarkDenominator::literal ? "literal" : "model_is_dark_free";
}

DarkDenominator dark_denominator_from_string(std::string_view text) {
  if (text == "literal") return DarkDenominator::literal;
  if (text == "model_is_dark_free") return DarkDenominator::model_is_dark_free;
  throw Error(ErrorCode::configuration, "unknown dark_denominator '" + std::string(text) + "'");
}

ProjectConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           const std::string& source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, source + ": invalid JSON: " + e.what());
  }
  ProjectConfig cfg;
  try {
    reject_unknown(j, {"camera", "spectrometer", "model", "augment", "calibration", "indices", "seeds"},
                   "config");
    if (j.contains("camera")) cfg.camera_path = resolve(j, "camera", base_dir);
    if (j.contains("spectrometer")) cfg.spectrometer_path = resolve(j, "spectrometer", base_dir);

    if (j.contains("model")) {
      const json& m = j.at("model");
      reject_unknown(m, {"kind", "alpha", "max_epochs", "patience", "min_delta", "learning_rate",
                         "max_restarts"},
                     "model");
      if (m.contains("kind")) cfg.model_kind = model_kind_from_string(m.at("kind").get<std::string>());
      read_into(m, "alpha", cfg.mlp.alpha);
      read_into(m, "max_epochs", cfg.mlp.max_epochs);
      read_into(m, "patience", cfg.mlp.patience);
      read_into(m, "min_delta", cfg.mlp.min_delta);
      read_into(m, "learning_rate", cfg.mlp.adam.learning_rate);
      read_into(m, "max_restarts", cfg.mlp.max_restarts);
    }
    if (j.contains("augment")) {
      const json& a = j.at("augment");
      reject_unknown(a, {"enabled", "replicas", "max_scale", "zero_probability"}, "augment");
      read_into(a, "enabled", cfg.augment_enabled);
      read_into(a, "replicas", cfg.augment.replicas);
      read_into(a, "max_scale", cfg.augment.max_scale);
      read_into(a, "zero_probability", cfg.augment.zero_probability);
    }
    if (j.contains("calibration")) {
      const json& c = j.at("calibration");
      reject_unknown(c, {"clip_max", "epsilon_denom", "dark_denominator"}, "calibration");
      read_into(c, "clip_max", cfg.clip_max);
      read_into(c, "epsilon_denom", cfg.epsilon_denom);
      if (c.contains("dark_denominator")) {
        cfg.dark_denominator = dark_denominator_from_string(c.at("dark_denominator").get<std::string>());
      }
    }
    if (j.contains("indices")) {
      const json& ix = j.at("indices");
      reject_unknown(ix, {"ndvi_nm", "smc_nm", "otsu_bins"}, "indices");
      cfg.ndvi_nm = read_pair(ix, "ndvi_nm", cfg.ndvi_nm);
      cfg.smc_nm = read_pair(ix, "smc_nm", cfg.smc_nm);
      read_into(ix, "otsu_bins", cfg.otsu_bins);
    }
    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      reject_unknown(s, {"split", "augment", "train"}, "seeds");
      read_into(s, "split", cfg.split_seed);
      read_into(s, "augment", cfg.augment_seed);
      read_into(s, "train", cfg.train_seed);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::configuration, source + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), source + ": " + e.what());
  }
  cfg.mlp.seed = cfg.train_seed;

  if (!(cfg.clip_max > 0.0) || !(cfg.epsilon_denom > 0.0)) {
    throw Error(ErrorCode::configuration, source + ": clip_max and epsilon_denom must be > 0");
  }
  if (cfg.otsu_bins < 2) throw Error(ErrorCode::configuration, source + ": otsu_bins must be >= 2");
  if (!(cfg.augment.max_scale >= 0.0 && cfg.augment.max_scale < 1.0) ||
      !(cfg.augment.zero_probability >= 0.0 && cfg.augment.zero_probability <= 1.0)) {
    throw Error(ErrorCode::configuration, source + ": augment ranges are invalid");
  }
  return cfg;
}

ProjectConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_text(path), path.parent_path(), path.string());
}

std::string config_to_json(const ProjectConfig& cfg) {
  nlohmann::ordered_json j;
  if (cfg.camera_path) j["camera"] = cfg.camera_path->string();
  if (cfg.spectrometer_path) j["spectrometer"] = cfg.spectrometer_path->string();
  j["model"] = {{"kind", std::string(to_string(cfg.model_kind))},
                {"alpha", cfg.mlp.alpha},
                {"max_epochs", cfg.mlp.max_epochs},
                {"patience", cfg.mlp.patience},
                {"min_delta", cfg.mlp.min_delta},
                {"learning_rate", cfg.mlp.adam.learning_rate},
                {"max_restarts", cfg.mlp.max_restarts}};
  j["augment"] = {{"enabled", cfg.augment_enabled},
                  {"replicas", cfg.augment.replicas},
                  {"max_scale", cfg.augment.max_scale},
                  {"zero_probability", cfg.augment.zero_probability}};
  j["calibration"] = {{"clip_max", cfg.clip_max},
                      {"epsilon_denom", cfg.epsilon_denom},
                      {"dark_denominator", std::string(to_string(cfg.dark_denominator))}};
  j["indices"] = {{"ndvi_nm", {cfg.ndvi_nm.first, cfg.ndvi_nm.second}},
                  {"smc_nm", {cfg.smc_nm.first, cfg.smc_nm.second}},
                  {"otsu_bins", cfg.otsu_bins}};
  j["seeds"] = {{"split", cfg.split_seed}, {"augment", cfg.augment_seed}, {"train", cfg.train_seed}};
  return j.dump(2) + "\n";
}

}  // namespace hypercal
