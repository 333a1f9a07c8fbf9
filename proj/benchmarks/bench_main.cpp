#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "hypercal/calibration.hpp"
#include "hypercal/log.hpp"
#include "hypercal/synthdata.hpp"
#include "hypercal/terrain_indices.hpp"
#include "hypercal/whiteref_model.hpp"

namespace {

using namespace hypercal;

DataCube random_reflectance(std::size_t h, std::size_t w, std::size_t bands) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.9);
  std::vector<double> v(h * w * bands);
  for (double& x : v) x = u(rng);
  return DataCube(h, w, WavelengthGrid::linspace(660.0, 980.0, bands), Unit::reflectance, 1.0,
                  std::move(v));
}

void BM_NdviOtsu(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DataCube cube = random_reflectance(n, n, 33);
  for (auto _ : state) {
    const IndexMap m = ndvi(cube);
    benchmark::DoNotOptimize(otsu_threshold(m).threshold);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_NdviOtsu)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

struct Rig {
  DeviceSpec camera = presets::vnir_camera();
  DeviceSpec spectrometer = presets::vnir_spectrometer();
  std::vector<CalibrationSample> samples;
  std::vector<synth::RawSample> raw;

  explicit Rig(std::size_t n) {
    camera = camera.with_dark(synth::make_dark(camera, n, n, 0.02, 1));
    spectrometer = spectrometer.with_dark(synth::make_dark(spectrometer, 1, 1, 0.02, 2));
    synth::DatasetOptions opt;
    opt.height = n;
    opt.width = n;
    opt.samples = 100;
    raw = synth::make_calibration_dataset(camera, spectrometer, opt, 3);
    for (const auto& r : raw) {
      samples.push_back(synth::to_calibration_sample(r.cube, r.spectrometer, camera, spectrometer));
    }
  }
};

void BM_FitMlr(benchmark::State& state) {
  const Rig rig(static_cast<std::size_t>(state.range(0)));
  log::set_warning_sink([](const std::string&) {});
  for (auto _ : state) benchmark::DoNotOptimize(fit_mlr(rig.samples).parameters().data());
  log::set_warning_sink({});
}
BENCHMARK(BM_FitMlr)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Calibrate(benchmark::State& state) {
  const Rig rig(static_cast<std::size_t>(state.range(0)));
  log::set_warning_sink([](const std::string&) {});
  auto bank = std::make_shared<PixelModelBank>(fit_mlr(rig.samples));
  log::set_warning_sink({});
  const CalibrationContext ctx = CalibrationContext::make(rig.camera, rig.spectrometer, bank);
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate(ctx, rig.raw[0].cube, rig.raw[0].spectrometer).values().data());
  }
}
BENCHMARK(BM_Calibrate)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
