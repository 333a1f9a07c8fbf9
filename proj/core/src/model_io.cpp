#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "hypercal/error.hpp"
#include "hypercal/whiteref_model.hpp"

namespace hypercal {
namespace {

constexpr std::uint8_t kMagic[4] = {'H', 'C', 'A', 'L'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) {
    throw Error(ErrorCode::format, "model bank is truncated");
  }
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
  }
  pos += sizeof(T);
  return static_cast<T>(value);
}

}  // namespace

std::vector<std::uint8_t> encode_bank(const PixelModelBank& bank) {
  if (bank.height() > 0xFFFFFFFFu || bank.width() > 0xFFFFFFFFu || bank.bands() > 0xFFFFu) {
    throw Error(ErrorCode::format, "model bank dimensions exceed the container limits");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kBankHeaderBytes + bank.parameters().size() * 8);
  for (std::uint8_t byte : kMagic) out.push_back(byte);
  put_le<std::uint16_t>(out, kBankFormatVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(bank.kind()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.height()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.width()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(bank.bands()));
  for (double v : bank.parameters()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

PixelModelBank decode_bank(std::span<const std::uint8_t> bytes, TrainingMeta meta) {
  if (bytes.size() < kBankHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::format, "not a model bank (missing HCAL magic)");
  }
  std::size_t pos = 4;
  const auto version = get_le<std::uint16_t>(bytes, pos);
  if (version != kBankFormatVersion) {
    throw Error(ErrorCode::format, "unsupported model bank version " + std::to_string(version));
  }
  const auto kind_byte = get_le<std::uint8_t>(bytes, pos);
  if (kind_byte > 1) throw Error(ErrorCode::format, "unknown model kind in bank header");
  const auto kind = static_cast<ModelKind>(kind_byte);
  const std::size_t height = get_le<std::uint32_t>(bytes, pos);
  const std::size_t width = get_le<std::uint32_t>(bytes, pos);
  const std::size_t bands = get_le<std::uint16_t>(bytes, pos);

  const std::size_t count = height * width * PixelModelBank::block_size(kind, bands);
  if (bytes.size() - pos != count * 8) {
    throw Error(ErrorCode::format, "model bank body has " + std::to_string(bytes.size() - pos) +
                                       " bytes, header implies " + std::to_string(count * 8));
  }
  std::vector<double> params(count);
  for (double& v : params) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
  return PixelModelBank(kind, height, width, bands, std::move(params), std::move(meta));
}

std::string training_meta_to_json(const TrainingMeta& meta, const PixelModelBank& bank) {
  nlohmann::ordered_json j;
  j["format_version"] = kBankFormatVersion;
  j["model_kind"] = std::string(to_string(bank.kind()));
  j["height"] = bank.height();
  j["width"] = bank.width();
  j["bands"] = bank.bands();
  j["alpha"] = meta.alpha;
  j["max_epochs"] = meta.max_epochs;
  j["patience"] = meta.patience;
  j["min_delta"] = meta.min_delta;
  j["adam"] = {{"learning_rate", meta.adam.learning_rate},
               {"beta1", meta.adam.beta1},
               {"beta2", meta.adam.beta2},
               {"epsilon", meta.adam.epsilon},
               {"assumed_defaults", true}};
  j["seed"] = meta.seed;
  j["split_seed"] = meta.split_seed;
  j["augment_replicas"] = meta.augment_replicas;
  j["ridge_lambda"] = meta.ridge_lambda;
  j["train_samples"] = meta.train_samples;
  j["val_samples"] = meta.val_samples;
  j["mean_epochs"] = meta.mean_epochs;
  j["max_epochs_run"] = meta.max_epochs_run;
  j["restarts"] = meta.restarts;
  j["loss_history"] = meta.loss_history;
  j["warnings"] = meta.warnings;
  return j.dump(2) + "\n";
}

TrainingMeta training_meta_from_json(const std::string& text) {
  TrainingMeta meta;
  try {
    const auto j = nlohmann::json::parse(text);
    meta.alpha = j.value("alpha", 0.0);
    meta.max_epochs = j.value("max_epochs", std::size_t{0});
    meta.patience = j.value("patience", std::size_t{0});
    meta.min_delta = j.value("min_delta", 0.0);
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      meta.adam.learning_rate = a.value("learning_rate", meta.adam.learning_rate);
      meta.adam.beta1 = a.value("beta1", meta.adam.beta1);
      meta.adam.beta2 = a.value("beta2", meta.adam.beta2);
      meta.adam.epsilon = a.value("epsilon", meta.adam.epsilon);
    }
    meta.seed = j.value("seed", std::uint64_t{0});
    meta.split_seed = j.value("split_seed", std::uint64_t{0});
    meta.augment_replicas = j.value("augment_replicas", std::size_t{0});
    meta.ridge_lambda = j.value("ridge_lambda", 0.0);
    meta.train_samples = j.value("train_samples", std::size_t{0});
    meta.val_samples = j.value("val_samples", std::size_t{0});
    meta.mean_epochs = j.value("mean_epochs", std::size_t{0});
    meta.max_epochs_run = j.value("max_epochs_run", std::size_t{0});
    meta.restarts = j.value("restarts", std::size_t{0});
    meta.loss_history = j.value("loss_history", std::vector<double>{});
    meta.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format, std::string("training metadata: ") + e.what());
  }
  return meta;
}

void save_bank(const PixelModelBank& bank, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_bank(bank);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write model bank '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "failed writing model bank '" + path.string() + "'");

  std::filesystem::path sidecar = path;
  sidecar += ".json";
  std::ofstream meta(sidecar, std::ios::trunc);
  if (!meta) throw Error(ErrorCode::io, "cannot write '" + sidecar.string() + "'");
  meta << training_meta_to_json(bank.meta(), bank);
}

PixelModelBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open model bank '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  TrainingMeta meta;
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  if (std::ifstream side(sidecar); side) {
    const std::string text((std::istreambuf_iterator<char>(side)), std::istreambuf_iterator<char>());
    meta = training_meta_from_json(text);
  }
  try {
    return decode_bank(bytes, std::move(meta));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace hypercal
