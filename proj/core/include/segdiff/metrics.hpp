#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "segdiff/image.hpp"

namespace segdiff {

/// k x k confusion counts, rows = ground truth, cols = prediction.
struct ConfusionMatrix {
  int k = 0;
  std::vector<std::uint64_t> counts;  // k*k
  std::uint64_t ignore_count = 0;

  static ConfusionMatrix create(int k);
  std::uint64_t at(int gt, int pred) const { return counts[std::size_t(gt) * k + pred]; }
  std::uint64_t& at(int gt, int pred) { return counts[std::size_t(gt) * k + pred]; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

/// Tally one gt/pred pair into the matrix. Pixels whose ground truth equals
/// ignore_index are skipped and counted in ignore_count.
void accumulate(ConfusionMatrix& cm, const LabelMap& gt, const LabelMap& pred,
                std::optional<int> ignore_index = std::nullopt);

/// IoU per class; nullopt flags a class absent from both maps.
std::vector<std::optional<double>> iou_per_class(const ConfusionMatrix& cm);

/// Arithmetic mean of IoU over present classes (background included).
double mean_iou(const ConfusionMatrix& cm);

/// Report text: one "class<TAB>iou" line per class (absent classes print
/// "absent"), then a final "mIoU<TAB>value" line; 4 decimals.
std::string format_report(const ConfusionMatrix& cm);

}  // namespace segdiff
