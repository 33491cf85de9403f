#include "segdiff/labeling.hpp"

#include <algorithm>
#include <string>

namespace segdiff {

void ActivationSet::validate() const {
  if (maps.empty()) {
    raise(errc::no_seeds_for_class, "activation set is empty");
  }
  std::vector<int> seen;
  for (const auto& [cls, map] : maps) {
    if (cls < 1) raise(errc::value_out_of_range, "activation class index must be >= 1");
    if (std::find(seen.begin(), seen.end(), cls) != seen.end()) {
      raise(errc::value_out_of_range, "duplicate activation class " + std::to_string(cls));
    }
    seen.push_back(cls);
    if (map.width != maps.front().second.width || map.height != maps.front().second.height) {
      raise(errc::dimension_mismatch, "activation maps must share dimensions");
    }
  }
}

SeedReport extract_seeds(const SuperpixelMap& sp, const ActivationSet& acts, const FloatMap& m,
                         double seed_frac, double bg_thresh) {
  acts.validate();
  if (!(seed_frac > 0.0) || seed_frac > 1.0 || bg_thresh < 0.0 || bg_thresh >= 1.0) {
    raise(errc::value_out_of_range, "seed_frac in (0,1], bg_thresh in [0,1) required");
  }
  if (m.width != sp.width || m.height != sp.height ||
      acts.maps.front().second.width != sp.width ||
      acts.maps.front().second.height != sp.height) {
    raise(errc::dimension_mismatch, "superpixel map, M and activations must share dimensions");
  }

  const std::size_t n = static_cast<std::size_t>(sp.n);
  const std::size_t pixels = sp.pixel_count();

  // Mean M and mean activation per superpixel.
  std::vector<double> count(n, 0.0), mean_m(n, 0.0);
  for (std::size_t p = 0; p < pixels; ++p) {
    count[sp.assignment[p]] += 1.0;
    mean_m[sp.assignment[p]] += m.data[p];
  }
  for (std::size_t i = 0; i < n; ++i) mean_m[i] /= count[i];

  std::vector<std::vector<double>> mean_act(acts.maps.size(), std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < acts.maps.size(); ++a) {
    const FloatMap& act = acts.maps[a].second;
    auto& mean = mean_act[a];
    for (std::size_t p = 0; p < pixels; ++p) mean[sp.assignment[p]] += act.data[p];
    for (std::size_t i = 0; i < n; ++i) mean[i] /= count[i];
  }

  SeedReport report;
  report.bg_thresh = bg_thresh;

  std::vector<double> threshold(acts.maps.size(), 0.0);
  for (std::size_t a = 0; a < acts.maps.size(); ++a) {
    const double peak = *std::max_element(mean_act[a].begin(), mean_act[a].end());
    if (!(peak > 0.0)) {
      raise(errc::no_seeds_for_class,
            "class " + std::to_string(acts.maps[a].first) + " has no activation");
    }
    threshold[a] = seed_frac * peak;
    report.activation_threshold[acts.maps[a].first] = threshold[a];
  }

  // Winner per superpixel among the classes whose threshold it reaches:
  // higher mean activation wins, ties to the lower class index.
  std::vector<int> winner(n, -1);
  std::vector<char> candidate(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = -1.0;
    for (std::size_t a = 0; a < acts.maps.size(); ++a) {
      if (mean_act[a][i] < threshold[a]) continue;
      candidate[i] = 1;
      const int cls = acts.maps[a].first;
      if (mean_act[a][i] > best ||
          (mean_act[a][i] == best && cls < winner[i])) {
        best = mean_act[a][i];
        winner[i] = cls;
      }
    }
  }

  for (const auto& [cls, map] : acts.maps) {
    report.per_class.emplace(cls, SeedAssignment{});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (winner[i] >= 0) {
      report.per_class[winner[i]].clamp_one.push_back(static_cast<std::int32_t>(i));
    } else if (!candidate[i] && mean_m[i] < bg_thresh) {
      report.background_zeros.push_back(static_cast<std::int32_t>(i));
    }
  }
  for (auto& [cls, seeds] : report.per_class) {
    if (seeds.clamp_one.empty()) {
      raise(errc::no_seeds_for_class,
            "class " + std::to_string(cls) + " lost all its seed candidates");
    }
    seeds.clamp_zero = report.background_zeros;
  }
  return report;
}

std::vector<int> fuse_labels(const std::map<int, DiffusionField>& fields, const SeedReport& report,
                             double accept_thresh) {
  if (fields.empty()) {
    raise(errc::length_mismatch, "no diffusion fields to fuse");
  }
  if (accept_thresh < 0.0 || accept_thresh >= 1.0) {
    raise(errc::value_out_of_range, "accept_thresh in [0,1) required");
  }
  const std::size_t n = fields.begin()->second.q.size();
  for (const auto& [cls, field] : fields) {
    if (field.q.size() != n) {
      raise(errc::length_mismatch, "diffusion fields disagree on superpixel count");
    }
    if (!report.per_class.count(cls)) {
      raise(errc::length_mismatch, "field class " + std::to_string(cls) + " missing from seeds");
    }
  }

  std::vector<int> classes(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int best_cls = 0;
    double best_q = -1.0;
    for (const auto& [cls, field] : fields) {  // ascending class order
      if (field.q[i] > best_q) {
        best_q = field.q[i];
        best_cls = cls;
      }
    }
    classes[i] = best_q >= accept_thresh ? best_cls : 0;
  }
  return classes;
}

LabelMap rasterize(const SuperpixelMap& sp, const std::vector<int>& classes,
                   const ClassTable& table) {
  if (classes.size() != static_cast<std::size_t>(sp.n)) {
    raise(errc::length_mismatch, "class vector length does not match superpixel count");
  }
  for (int cls : classes) {
    if (cls < 0 || cls >= table.size()) {
      raise(errc::index_out_of_table, "class " + std::to_string(cls) + " exceeds class table");
    }
  }
  LabelMap out = LabelMap::create(sp.width, sp.height, table);
  for (std::size_t p = 0; p < sp.pixel_count(); ++p) {
    out.data[p] = static_cast<std::uint8_t>(classes[sp.assignment[p]]);
  }
  return out;
}

}  // namespace segdiff
