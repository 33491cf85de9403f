#pragma once

#include <filesystem>
#include <string>

#include "segdiff/diffusion.hpp"

namespace segdiff {

enum class DiffusionMode { clamped, jacobi };

/// Every tunable of the label-transfer pipeline. Defaults target plain
/// photographic input; all of them are deliberately exposed because the
/// right values are scene dependent.
struct PipelineConfig {
  double sigma = 0.1;
  double seed_frac = 0.7;
  double bg_thresh = 0.05;
  double accept_thresh = 0.5;
  int slic_k = 600;
  double slic_compactness = 10.0;
  int slic_iters = 10;
  double solver_tol = 1e-8;
  int solver_max_iters = 0;  // <= 0 means 10 * N
  AffinityNorm affinity_norm = AffinityNorm::linear;
  DiffusionMode diffusion_mode = DiffusionMode::clamped;
  int jacobi_iters = 100;

  bool operator==(const PipelineConfig&) const = default;

  void validate() const;  // throws BadConfig on out-of-range values
};

/// Parse "key = value" lines. Blank lines and '#' comments are allowed;
/// unknown keys are hard errors.
PipelineConfig parse_config_text(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Serialize every key; parse_config_text(dump_config(c)) == c.
std::string dump_config(const PipelineConfig& config);

}  // namespace segdiff
