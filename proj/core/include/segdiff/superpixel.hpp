#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "segdiff/image.hpp"

namespace segdiff {

/// Row-major superpixel ids in [0, n). After connectivity enforcement every
/// id labels exactly one 4-connected region and every id in [0, n) occurs.
struct SuperpixelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> assignment;  // width*height
  int n = 0;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::int32_t at(int x, int y) const { return assignment[static_cast<std::size_t>(y) * width + x]; }
};

/// Undirected 4-adjacency between superpixels: sorted unique (i, j) pairs
/// with i < j, no self loops.
struct Adjacency {
  int n = 0;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
};

/// One row per superpixel: (mean L, mean a, mean b, mean M), all in [0,1]
/// when fed normalized inputs.
struct FeatureTable {
  std::vector<std::array<double, 4>> features;

  int size() const { return static_cast<int>(features.size()); }
};

/// SLIC oversegmentation on a normalized Lab image. Deterministic: grid
/// seeding, fixed iteration order, lowest cluster id wins distance ties.
/// Includes connectivity repair; the result satisfies n <= 2*k.
/// Throws KTooLarge when k exceeds the pixel count.
SuperpixelMap slic_segment(const LabImage& img, int k, double compactness, int iters);

/// Split every label into its 4-connected components, absorb components
/// smaller than min_size pixels into their largest adjacent region, and
/// re-compact ids to [0, n) in raster order of first appearance.
SuperpixelMap enforce_connectivity(const SuperpixelMap& sp, int min_size);

/// Exact 4-adjacency edge set of a connected superpixel map.
Adjacency build_adjacency(const SuperpixelMap& sp);

/// Arithmetic mean of (L, a, b, M) over the pixels of each superpixel.
FeatureTable compute_features(const SuperpixelMap& sp, const LabImage& lab, const FloatMap& m);

}  // namespace segdiff
