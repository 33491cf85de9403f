#include <benchmark/benchmark.h>

#include <random>

#include "segdiff/superpixel.hpp"

using namespace segdiff;

namespace {

LabImage noisy_image(int side) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LabImage img;
  img.width = img.height = side;
  img.normalized = true;
  img.data.resize(std::size_t(side) * side * 3);
  for (auto& v : img.data) v = unit(rng);
  return img;
}

}  // namespace

static void SlicSegment(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const LabImage img = noisy_image(side);
  const int k = side * side / 40;
  for (auto _ : state) {
    SuperpixelMap sp = slic_segment(img, k, 10.0, 10);
    benchmark::DoNotOptimize(sp.assignment.data());
  }
  state.SetComplexityN(side * side);
}
BENCHMARK(SlicSegment)->RangeMultiplier(2)->Range(64, 256)->Complexity();

static void AdjacencyAndFeatures(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const LabImage img = noisy_image(side);
  FloatMap m;
  m.width = m.height = side;
  m.data.assign(std::size_t(side) * side, 0.5f);
  const SuperpixelMap sp = slic_segment(img, side * side / 40, 10.0, 5);
  for (auto _ : state) {
    Adjacency adj = build_adjacency(sp);
    FeatureTable feats = compute_features(sp, img, m);
    benchmark::DoNotOptimize(adj.edges.data());
    benchmark::DoNotOptimize(feats.features.data());
  }
}
BENCHMARK(AdjacencyAndFeatures)->Arg(128)->Arg(256);
