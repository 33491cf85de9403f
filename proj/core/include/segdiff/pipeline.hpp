#pragma once

#include "segdiff/config.hpp"
#include "segdiff/labeling.hpp"

namespace segdiff {

struct PipelineResult {
  LabelMap labels;
  SuperpixelMap superpixels;
  SeedReport seeds;
  std::map<int, DiffusionField> fields;
  bool all_converged = true;
};

/// The full label-transfer chain: Lab conversion and normalization, SLIC,
/// features, Gaussian affinity, seed extraction, per-class diffusion,
/// fusion, rasterization.
PipelineResult run_pipeline(const RawImage& image, const FloatMap& m, const ActivationSet& acts,
                            const ClassTable& table, const PipelineConfig& config);

}  // namespace segdiff
