#include "segdiff/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace segdiff {

namespace {

struct Cluster {
  double x = 0, y = 0;     // spatial center
  double l = 0, a = 0, b = 0;  // color center
};

void require_normalized(const LabImage& img) {
  if (!img.normalized) {
    raise(errc::not_normalized, "LabImage must be normalized");
  }
}

// Choose a nx-by-ny seed grid with nx*ny as close to k as possible while
// roughly matching the image aspect ratio.
void seed_grid(int width, int height, int k, int& nx, int& ny) {
  nx = std::max(1, static_cast<int>(std::lround(
                       std::sqrt(double(k) * width / std::max(1, height)))));
  nx = std::min(nx, width);
  ny = std::max(1, static_cast<int>(std::lround(double(k) / nx)));
  ny = std::min(ny, height);
  while (std::int64_t(nx) * ny > k && nx * ny > 1) {
    // shrink the axis that overshoots most
    if (nx > 1 && (ny == 1 || nx * (ny - 1) < (nx - 1) * ny)) {
      --nx;
    } else {
      --ny;
    }
  }
}

}  // namespace

SuperpixelMap slic_segment(const LabImage& img, int k, double compactness, int iters) {
  require_normalized(img);
  const int width = img.width;
  const int height = img.height;
  const std::int64_t pixels = std::int64_t(width) * height;
  if (k < 1 || iters < 1 || compactness < 0) {
    raise(errc::value_out_of_range, "slic_segment: k >= 1, iters >= 1, compactness >= 0 required");
  }
  if (k > pixels) {
    raise(errc::k_too_large, "requested superpixel count exceeds pixel count");
  }

  int nx = 0, ny = 0;
  seed_grid(width, height, k, nx, ny);
  const int n_clusters = nx * ny;

  std::vector<Cluster> clusters(n_clusters);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Cluster& c = clusters[j * nx + i];
      // pixel-center coordinates: pixel x sits at position x, spanning the
      // grid symmetrically requires the -0.5 shift
      c.x = (i + 0.5) * width / nx - 0.5;
      c.y = (j + 0.5) * height / ny - 0.5;
      const int px = std::clamp(static_cast<int>(std::lround(c.x)), 0, width - 1);
      const int py = std::clamp(static_cast<int>(std::lround(c.y)), 0, height - 1);
      const double* lab = img.pixel(px, py);
      c.l = lab[0];
      c.a = lab[1];
      c.b = lab[2];
    }
  }

  // Sampling interval; the search window is 2S around each center.
  const double interval = std::sqrt(double(pixels) / n_clusters);
  const double half_window =
      std::max({2.0 * interval, double(width) / nx, double(height) / ny});
  const double m2_over_s2 = (compactness * compactness) / (interval * interval);

  std::vector<std::int32_t> assignment(static_cast<std::size_t>(pixels), -1);
  std::vector<double> best(static_cast<std::size_t>(pixels),
                           std::numeric_limits<double>::infinity());

  for (int iter = 0; iter < iters; ++iter) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    std::fill(assignment.begin(), assignment.end(), -1);

    // Ascending cluster order plus strict improvement makes the lowest id
    // win every distance tie.
    for (int c = 0; c < n_clusters; ++c) {
      const Cluster& cl = clusters[c];
      const int x0 = std::max(0, static_cast<int>(std::floor(cl.x - half_window)));
      const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cl.x + half_window)));
      const int y0 = std::max(0, static_cast<int>(std::floor(cl.y - half_window)));
      const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cl.y + half_window)));
      for (int y = y0; y <= y1; ++y) {
        const double* row = img.data.data() + 3 * (std::size_t(y) * width + x0);
        for (int x = x0; x <= x1; ++x, row += 3) {
          const double dl = row[0] - cl.l;
          const double da = row[1] - cl.a;
          const double db = row[2] - cl.b;
          const double dx = x - cl.x;
          const double dy = y - cl.y;
          const double d = dl * dl + da * da + db * db + (dx * dx + dy * dy) * m2_over_s2;
          const std::size_t p = std::size_t(y) * width + x;
          if (d < best[p]) {
            best[p] = d;
            assignment[p] = c;
          }
        }
      }
    }

    // Window coverage can leave gaps on extreme aspect ratios; fall back to
    // the spatially nearest center.
    for (std::size_t p = 0; p < assignment.size(); ++p) {
      if (assignment[p] >= 0) continue;
      const int x = static_cast<int>(p % width);
      const int y = static_cast<int>(p / width);
      double nearest = std::numeric_limits<double>::infinity();
      for (int c = 0; c < n_clusters; ++c) {
        const double dx = x - clusters[c].x;
        const double dy = y - clusters[c].y;
        const double d = dx * dx + dy * dy;
        if (d < nearest) {
          nearest = d;
          assignment[p] = c;
        }
      }
    }

    // Recompute centers as 5-D means of their pixels.
    std::vector<std::array<double, 6>> acc(n_clusters, {0, 0, 0, 0, 0, 0});
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::size_t p = std::size_t(y) * width + x;
        auto& a = acc[assignment[p]];
        const double* lab = img.data.data() + 3 * p;
        a[0] += x;
        a[1] += y;
        a[2] += lab[0];
        a[3] += lab[1];
        a[4] += lab[2];
        a[5] += 1.0;
      }
    }
    for (int c = 0; c < n_clusters; ++c) {
      if (acc[c][5] == 0) continue;  // empty cluster keeps its center
      clusters[c].x = acc[c][0] / acc[c][5];
      clusters[c].y = acc[c][1] / acc[c][5];
      clusters[c].l = acc[c][2] / acc[c][5];
      clusters[c].a = acc[c][3] / acc[c][5];
      clusters[c].b = acc[c][4] / acc[c][5];
    }
  }

  SuperpixelMap raw;
  raw.width = width;
  raw.height = height;
  raw.assignment = std::move(assignment);
  raw.n = n_clusters;

  const int min_size = std::max(1, static_cast<int>(pixels / (4 * std::int64_t(k))));
  SuperpixelMap sp = enforce_connectivity(raw, min_size);

  // Connectivity repair may split clusters; keep the n <= 2k contract by
  // absorbing the smallest regions until the budget holds.
  while (sp.n > 2 * k) {
    std::vector<int> sizes(sp.n, 0);
    for (auto id : sp.assignment) ++sizes[id];
    const int smallest =
        static_cast<int>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
    sp = enforce_connectivity(sp, sizes[smallest] + 1);
    if (sp.n <= 1) break;
  }
  return sp;
}

SuperpixelMap enforce_connectivity(const SuperpixelMap& sp, int min_size) {
  const int width = sp.width;
  const int height = sp.height;
  const std::size_t pixels = sp.pixel_count();
  if (width < 1 || height < 1 || sp.assignment.size() != pixels) {
    raise(errc::dimension_mismatch, "SuperpixelMap data length does not match dimensions");
  }

  // Flood-fill connected components in raster order of first appearance.
  std::vector<std::int32_t> comp(pixels, -1);
  std::vector<int> comp_size;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < pixels; ++start) {
    if (comp[start] >= 0) continue;
    const std::int32_t label = sp.assignment[start];
    const std::int32_t id = static_cast<std::int32_t>(comp_size.size());
    comp_size.push_back(0);
    comp[start] = id;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++comp_size[id];
      const int x = static_cast<int>(p % width);
      const int y = static_cast<int>(p / width);
      const std::size_t neighbors[4] = {p - 1, p + 1, p - width, p + width};
      const bool valid[4] = {x > 0, x + 1 < width, y > 0, y + 1 < height};
      for (int d = 0; d < 4; ++d) {
        if (!valid[d]) continue;
        const std::size_t q = neighbors[d];
        if (comp[q] < 0 && sp.assignment[q] == label) {
          comp[q] = id;
          stack.push_back(q);
        }
      }
    }
  }

  const int n_comp = static_cast<int>(comp_size.size());

  // Union-find over components; absorb sub-threshold components into their
  // currently largest adjacent component, smallest first.
  std::vector<std::int32_t> parent(n_comp);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> size_of(comp_size);
  auto find = [&](std::int32_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };

  if (min_size > 1 && n_comp > 1) {
    // component adjacency
    std::vector<std::vector<std::int32_t>> neigh(n_comp);
    auto add_edge = [&](std::int32_t a, std::int32_t b) {
      if (a == b) return;
      neigh[a].push_back(b);
      neigh[b].push_back(a);
    };
    for (std::size_t p = 0; p < pixels; ++p) {
      const int x = static_cast<int>(p % width);
      if (x + 1 < width) add_edge(comp[p], comp[p + 1]);
      if (p + width < pixels) add_edge(comp[p], comp[p + width]);
    }
    for (auto& v : neigh) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    std::vector<std::int32_t> order(n_comp);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::int32_t a, std::int32_t b) { return comp_size[a] < comp_size[b]; });
    for (std::int32_t c : order) {
      const std::int32_t root = find(c);
      if (size_of[root] >= min_size) continue;
      std::int32_t target = -1;
      int target_size = -1;
      for (std::int32_t nb : neigh[c]) {
        const std::int32_t r = find(nb);
        if (r == root) continue;
        if (size_of[r] > target_size || (size_of[r] == target_size && r < target)) {
          target = r;
          target_size = size_of[r];
        }
      }
      if (target < 0) continue;  // isolated label, nothing to merge into
      parent[root] = target;
      size_of[target] += size_of[root];
    }
  }

  // Re-compact surviving roots to [0, n) in raster order of first pixel.
  std::vector<std::int32_t> new_id(n_comp, -1);
  SuperpixelMap out;
  out.width = width;
  out.height = height;
  out.assignment.resize(pixels);
  std::int32_t next = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::int32_t root = find(comp[p]);
    if (new_id[root] < 0) new_id[root] = next++;
    out.assignment[p] = new_id[root];
  }
  out.n = next;
  return out;
}

Adjacency build_adjacency(const SuperpixelMap& sp) {
  Adjacency adj;
  adj.n = sp.n;
  const int width = sp.width;
  const std::size_t pixels = sp.pixel_count();
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::size_t p = 0; p < pixels; ++p) {
    const int x = static_cast<int>(p % width);
    const std::int32_t a = sp.assignment[p];
    if (x + 1 < width) {
      const std::int32_t b = sp.assignment[p + 1];
      if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    if (p + width < pixels) {
      const std::int32_t b = sp.assignment[p + width];
      if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  adj.edges = std::move(edges);
  return adj;
}

FeatureTable compute_features(const SuperpixelMap& sp, const LabImage& lab, const FloatMap& m) {
  require_normalized(lab);
  if (sp.width != lab.width || sp.height != lab.height || sp.width != m.width ||
      sp.height != m.height) {
    raise(errc::dimension_mismatch, "superpixel map, Lab image and M must share dimensions");
  }
  FeatureTable table;
  table.features.assign(static_cast<std::size_t>(sp.n), {0, 0, 0, 0});
  std::vector<double> count(static_cast<std::size_t>(sp.n), 0.0);
  for (std::size_t p = 0; p < sp.pixel_count(); ++p) {
    const std::int32_t id = sp.assignment[p];
    auto& f = table.features[id];
    f[0] += lab.data[3 * p];
    f[1] += lab.data[3 * p + 1];
    f[2] += lab.data[3 * p + 2];
    f[3] += m.data[p];
    count[id] += 1.0;
  }
  for (std::size_t i = 0; i < table.features.size(); ++i) {
    if (count[i] == 0.0) {
      raise(errc::value_out_of_range, "superpixel id " + std::to_string(i) + " has no pixels");
    }
    for (double& v : table.features[i]) v /= count[i];
  }
  return table;
}

}  // namespace segdiff
