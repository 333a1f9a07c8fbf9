#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hypercal/devices.hpp"
#include "hypercal/synthdata.hpp"
#include "hypercal/whiteref_model.hpp"

namespace hypercal::testing {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hypercal_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Paired devices with dark references sized for an H x W camera.
struct Rig {
  DeviceSpec camera;
  DeviceSpec spectrometer;
};

inline Rig vnir_rig(std::size_t height, std::size_t width, double dark_level = 0.02,
                    std::uint64_t seed = 11) {
  Rig rig{presets::vnir_camera(), presets::vnir_spectrometer()};
  rig.camera = rig.camera.with_dark(synth::make_dark(rig.camera, height, width, dark_level, seed));
  rig.spectrometer =
      rig.spectrometer.with_dark(synth::make_dark(rig.spectrometer, 1, 1, dark_level, seed + 1));
  return rig;
}

inline Rig swir_rig(std::size_t height, std::size_t width, double dark_level = 0.02,
                    std::uint64_t seed = 21) {
  Rig rig{presets::swir_camera(), presets::swir_spectrometer()};
  rig.camera = rig.camera.with_dark(synth::make_dark(rig.camera, height, width, dark_level, seed));
  rig.spectrometer =
      rig.spectrometer.with_dark(synth::make_dark(rig.spectrometer, 1, 1, dark_level, seed + 1));
  return rig;
}

inline std::vector<CalibrationSample> prepare(const std::vector<synth::RawSample>& raw, const Rig& rig) {
  std::vector<CalibrationSample> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    out.push_back(synth::to_calibration_sample(r.cube, r.spectrometer, rig.camera, rig.spectrometer,
                                               r.timestamp));
  }
  return out;
}

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace hypercal::testing
