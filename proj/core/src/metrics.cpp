#include "segdiff/metrics.hpp"

#include <cstdio>

namespace segdiff {

ConfusionMatrix ConfusionMatrix::create(int k) {
  if (k < 1) raise(errc::value_out_of_range, "class count must be >= 1");
  ConfusionMatrix cm;
  cm.k = k;
  cm.counts.assign(std::size_t(k) * k, 0);
  return cm;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k != k) raise(errc::dimension_mismatch, "confusion matrices disagree on class count");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  ignore_count += other.ignore_count;
  return *this;
}

void accumulate(ConfusionMatrix& cm, const LabelMap& gt, const LabelMap& pred,
                std::optional<int> ignore_index) {
  if (gt.width != pred.width || gt.height != pred.height) {
    raise(errc::dimension_mismatch, "ground truth and prediction dimensions differ");
  }
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    const int g = gt.data[p];
    const int q = pred.data[p];
    if (ignore_index && g == *ignore_index) {
      ++cm.ignore_count;
      continue;
    }
    if (g >= cm.k || q >= cm.k) {
      raise(errc::label_out_of_range, "label exceeds matrix class count");
    }
    ++cm.at(g, q);
  }
}

std::vector<std::optional<double>> iou_per_class(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> iou(static_cast<std::size_t>(cm.k));
  for (int c = 0; c < cm.k; ++c) {
    std::uint64_t row = 0, col = 0;
    for (int j = 0; j < cm.k; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    const std::uint64_t inter = cm.at(c, c);
    const std::uint64_t uni = row + col - inter;
    if (uni > 0) {
      iou[c] = double(inter) / double(uni);
    }
  }
  return iou;
}

double mean_iou(const ConfusionMatrix& cm) {
  const auto iou = iou_per_class(cm);
  double sum = 0.0;
  int present = 0;
  for (const auto& v : iou) {
    if (v) {
      sum += *v;
      ++present;
    }
  }
  if (present == 0) {
    raise(errc::no_present_classes, "no class present in ground truth or prediction");
  }
  return sum / present;
}

std::string format_report(const ConfusionMatrix& cm) {
  const auto iou = iou_per_class(cm);
  std::string out;
  char line[64];
  for (int c = 0; c < cm.k; ++c) {
    if (iou[c]) {
      std::snprintf(line, sizeof line, "%d\t%.4f\n", c, *iou[c]);
    } else {
      std::snprintf(line, sizeof line, "%d\tabsent\n", c);
    }
    out += line;
  }
  std::snprintf(line, sizeof line, "mIoU\t%.4f\n", mean_iou(cm));
  out += line;
  return out;
}

}  // namespace segdiff
