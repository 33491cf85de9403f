#include <benchmark/benchmark.h>

#include <random>

#include "segdiff/diffusion.hpp"

using namespace segdiff;

namespace {

// side x side grid graph with mildly varying weights, seeds in two corners
AffinityGraph grid_graph(int side, std::mt19937_64& rng) {
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  std::vector<double> weights;
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const std::int32_t id = y * side + x;
      if (x + 1 < side) {
        edges.emplace_back(id, id + 1);
        weights.push_back(weight(rng));
      }
      if (y + 1 < side) {
        edges.emplace_back(id, id + side);
        weights.push_back(weight(rng));
      }
    }
  }
  return make_affinity_graph(side * side, std::move(edges), std::move(weights));
}

SeedAssignment corner_seeds(int side) {
  SeedAssignment seeds;
  seeds.clamp_one = {0};
  seeds.clamp_zero = {side * side - 1};
  return seeds;
}

}  // namespace

static void DiffusionSolveGrid(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const AffinityGraph g = grid_graph(side, rng);
  const SeedAssignment seeds = corner_seeds(side);
  for (auto _ : state) {
    DiffusionField f = solve_diffusion(g, seeds);
    benchmark::DoNotOptimize(f.q.data());
  }
  state.SetComplexityN(side * side);
}
BENCHMARK(DiffusionSolveGrid)->RangeMultiplier(2)->Range(8, 64)->Complexity();

static void DiffusionOracleGrid(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const AffinityGraph g = grid_graph(side, rng);
  const SeedAssignment seeds = corner_seeds(side);
  for (auto _ : state) {
    DiffusionField f = solve_diffusion_oracle(g, seeds);
    benchmark::DoNotOptimize(f.q.data());
  }
}
BENCHMARK(DiffusionOracleGrid)->DenseRange(6, 14, 4);

static void DiffusionMultiClass(benchmark::State& state) {
  const int side = 48;
  const int classes = static_cast<int>(state.range(0));
  std::mt19937_64 rng(11);
  const AffinityGraph g = grid_graph(side, rng);
  std::map<int, SeedAssignment> per_class;
  for (int c = 0; c < classes; ++c) {
    per_class[c + 1].clamp_one = {std::int32_t(c * (side * side / classes))};
  }
  for (auto _ : state) {
    auto fields = diffuse_all_classes(g, per_class);
    benchmark::DoNotOptimize(&fields);
  }
}
BENCHMARK(DiffusionMultiClass)->Arg(2)->Arg(4)->Arg(8);
