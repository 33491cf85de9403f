#pragma once

#include <map>
#include <vector>

#include "segdiff/diffusion.hpp"
#include "segdiff/image.hpp"
#include "segdiff/superpixel.hpp"

namespace segdiff {

/// One activation map per declared class. Class indices are unique, >= 1,
/// and all maps share dimensions.
struct ActivationSet {
  std::vector<std::pair<int, FloatMap>> maps;

  void validate() const;
};

/// Seeds chosen per class, the shared background zero-clamps, and the
/// absolute activation thresholds that were applied.
struct SeedReport {
  std::map<int, SeedAssignment> per_class;
  std::vector<std::int32_t> background_zeros;
  std::map<int, double> activation_threshold;
  double bg_thresh = 0.0;
};

/// Pick positive seeds per class and background zero seeds.
///
/// A superpixel seeds class c when its mean activation reaches seed_frac
/// times the best mean for c. A superpixel qualifying for several classes
/// goes to the one with the higher mean (ties to the lower class index).
/// Background zeros are superpixels below every class threshold whose mean
/// M is under bg_thresh. Throws NoSeedsForClass when a class ends empty.
SeedReport extract_seeds(const SuperpixelMap& sp, const ActivationSet& acts, const FloatMap& m,
                         double seed_frac, double bg_thresh);

/// Per-superpixel class decision: argmax_c q^c_i when the best q reaches
/// accept_thresh, background otherwise. Ties go to the lower class index.
std::vector<int> fuse_labels(const std::map<int, DiffusionField>& fields, const SeedReport& report,
                             double accept_thresh);

/// Paint every pixel with its superpixel's class.
LabelMap rasterize(const SuperpixelMap& sp, const std::vector<int>& classes,
                   const ClassTable& table);

}  // namespace segdiff
