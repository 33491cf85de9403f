#include <benchmark/benchmark.h>

#include <filesystem>

#include "segdiff/pipeline.hpp"
#include "segdiff/synth.hpp"

using namespace segdiff;

namespace {

struct FixtureData {
  RawImage image;
  FloatMap m;
  ActivationSet acts;
  ClassTable table;
};

FixtureData fixture(int size) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("segdiff-bench-" + std::to_string(size));
  const FixturePaths paths = synthesize_fixture(dir, 1, FixtureVariant::two_blob, size, size);
  FixtureData data;
  data.image = load_image_png(paths.image);
  data.m = load_fmap(paths.m);
  data.table = load_class_table(paths.classes);
  for (const auto& [cls, path] : paths.activations) {
    data.acts.maps.emplace_back(cls, load_fmap(path));
  }
  std::filesystem::remove_all(dir);
  return data;
}

}  // namespace

static void FullPipeline(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const FixtureData data = fixture(size);
  PipelineConfig config;
  config.slic_k = size * size / 18;
  config.slic_compactness = 0.25;
  for (auto _ : state) {
    PipelineResult result = run_pipeline(data.image, data.m, data.acts, data.table, config);
    benchmark::DoNotOptimize(result.labels.data.data());
  }
  state.SetComplexityN(size * size);
}
BENCHMARK(FullPipeline)->RangeMultiplier(2)->Range(64, 256)->Complexity();

BENCHMARK_MAIN();
