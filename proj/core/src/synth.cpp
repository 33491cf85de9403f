#include "segdiff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace segdiff {

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

struct Blob {
  double cx, cy, radius;
  Rgb color;

  double dist(int x, int y) const { return std::hypot(x - cx, y - cy); }
  bool contains(int x, int y) const { return dist(x, y) <= radius; }
};

std::uint8_t clamp_channel(int v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

// Uniform int in [lo, hi]; drawn in a fixed order everywhere below so the
// whole fixture is a pure function of the seed.
int draw(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double draw_unit(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Rgb jitter_color(std::mt19937_64& rng, int r, int g, int b, int amount) {
  return {clamp_channel(r + draw(rng, -amount, amount)),
          clamp_channel(g + draw(rng, -amount, amount)),
          clamp_channel(b + draw(rng, -amount, amount))};
}

void paint_background(RawImage& img, std::mt19937_64& rng, Rgb base, int noise) {
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      std::uint8_t* px = img.pixel(x, y);
      px[0] = clamp_channel(base.r + draw(rng, -noise, noise));
      px[1] = clamp_channel(base.g + draw(rng, -noise, noise));
      px[2] = clamp_channel(base.b + draw(rng, -noise, noise));
    }
  }
}

void paint_blobs(RawImage& img, std::mt19937_64& rng, const std::vector<Blob>& blobs, int noise) {
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (const Blob& blob : blobs) {
        if (!blob.contains(x, y)) continue;
        std::uint8_t* px = img.pixel(x, y);
        px[0] = clamp_channel(blob.color.r + draw(rng, -noise, noise));
        px[1] = clamp_channel(blob.color.g + draw(rng, -noise, noise));
        px[2] = clamp_channel(blob.color.b + draw(rng, -noise, noise));
        break;
      }
    }
  }
}

FloatMap blob_union_map(int width, int height, const std::vector<Blob>& blobs,
                        std::mt19937_64& rng, double noise_band, double flip_prob) {
  FloatMap m = FloatMap::create(width, height, 0.0f);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool inside = false;
      bool near_edge = false;
      for (const Blob& blob : blobs) {
        const double d = blob.dist(x, y);
        if (d <= blob.radius) inside = true;
        if (std::abs(d - blob.radius) <= noise_band) near_edge = true;
      }
      float v = inside ? 1.0f : 0.0f;
      if (near_edge && noise_band > 0.0 && draw_unit(rng) < flip_prob) {
        v = 1.0f - v;
      }
      m.at(x, y) = v;
    }
  }
  return m;
}

FloatMap gaussian_bump(int width, int height, double cx, double cy, double s) {
  FloatMap act = FloatMap::create(width, height, 0.0f);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      act.at(x, y) = static_cast<float>(std::exp(-d2 / (2.0 * s * s)));
    }
  }
  return act;
}

FixturePaths write_fixture(const std::filesystem::path& dir, const RawImage& img,
                           const FloatMap& m, const std::vector<std::pair<int, FloatMap>>& acts,
                           const LabelMap& gt, const ClassTable& table) {
  std::filesystem::create_directories(dir);
  FixturePaths paths;
  paths.image = dir / "image.png";
  paths.m = dir / "m.fmap";
  paths.gt = dir / "gt.png";
  paths.classes = dir / "classes.txt";
  save_image_png(img, paths.image);
  save_fmap(m, paths.m);
  save_label_png(gt, paths.gt);
  save_class_table(table, paths.classes);
  for (const auto& [cls, act] : acts) {
    const auto path = dir / ("act_" + std::to_string(cls) + ".fmap");
    save_fmap(act, path);
    paths.activations.emplace_back(cls, path);
  }
  return paths;
}

FixturePaths make_two_blob(const std::filesystem::path& dir, std::mt19937_64& rng, int width,
                           int height, bool gradient_bg) {
  const double scale = std::min(width, height) / 128.0;

  std::vector<Blob> blobs(2);
  blobs[0].radius = (gradient_bg ? draw(rng, 24, 27) : draw(rng, 18, 22)) * scale;
  blobs[1].radius = (gradient_bg ? draw(rng, 24, 27) : draw(rng, 18, 22)) * scale;
  blobs[0].cx = 0.27 * width + draw(rng, -2, 2) * scale;
  blobs[0].cy = 0.5 * height + draw(rng, -4, 4) * scale;
  blobs[1].cx = 0.73 * width + draw(rng, -2, 2) * scale;
  blobs[1].cy = 0.5 * height + draw(rng, -4, 4) * scale;
  blobs[0].color = jitter_color(rng, 200, 50, 40, 12);   // warm red
  blobs[1].color = jitter_color(rng, 40, 110, 205, 12);  // cold blue

  RawImage img = RawImage::create(width, height);
  if (gradient_bg) {
    // horizontal ramp, still far from both blob colors
    const Rgb left = jitter_color(rng, 70, 95, 70, 6);
    const Rgb right = jitter_color(rng, 170, 185, 160, 6);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double t = width > 1 ? double(x) / (width - 1) : 0.0;
        std::uint8_t* px = img.pixel(x, y);
        px[0] = clamp_channel(static_cast<int>(std::lround(left.r + t * (right.r - left.r))));
        px[1] = clamp_channel(static_cast<int>(std::lround(left.g + t * (right.g - left.g))));
        px[2] = clamp_channel(static_cast<int>(std::lround(left.b + t * (right.b - left.b))));
      }
    }
  } else {
    paint_background(img, rng, jitter_color(rng, 95, 105, 115, 8), 2);
  }
  paint_blobs(img, rng, blobs, gradient_bg ? 0 : 2);

  const double noise_band = gradient_bg ? 0.0 : 1.5;
  FloatMap m = blob_union_map(width, height, blobs, rng, noise_band, 0.25);

  std::vector<std::pair<int, FloatMap>> acts;
  for (int c = 0; c < 2; ++c) {
    acts.emplace_back(c + 1, gaussian_bump(width, height, blobs[c].cx, blobs[c].cy,
                                           blobs[c].radius / 2.0));
  }

  ClassTable table;
  table.names = {"background", "blob_a", "blob_b"};
  LabelMap gt = LabelMap::create(width, height, table);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 2; ++c) {
        if (blobs[c].contains(x, y)) {
          gt.at(x, y) = static_cast<std::uint8_t>(c + 1);
          break;
        }
      }
    }
  }
  return write_fixture(dir, img, m, acts, gt, table);
}

FixturePaths make_checker(const std::filesystem::path& dir, std::mt19937_64& rng, int width,
                          int height) {
  const int tile = std::max(8, std::min(width, height) / 4);
  const Rgb colors[2] = {jitter_color(rng, 210, 190, 60, 10), jitter_color(rng, 60, 60, 160, 10)};

  RawImage img = RawImage::create(width, height);
  ClassTable table;
  table.names = {"background", "checker_a", "checker_b"};
  LabelMap gt = LabelMap::create(width, height, table);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int cell = ((x / tile) + (y / tile)) % 2;
      std::uint8_t* px = img.pixel(x, y);
      px[0] = clamp_channel(colors[cell].r + draw(rng, -2, 2));
      px[1] = clamp_channel(colors[cell].g + draw(rng, -2, 2));
      px[2] = clamp_channel(colors[cell].b + draw(rng, -2, 2));
      gt.at(x, y) = static_cast<std::uint8_t>(cell + 1);
    }
  }

  FloatMap m = FloatMap::create(width, height, 1.0f);  // everything is object

  // one bump per tile center, combined by max
  std::vector<std::pair<int, FloatMap>> acts;
  for (int cls = 0; cls < 2; ++cls) {
    FloatMap act = FloatMap::create(width, height, 0.0f);
    for (int ty = 0; ty * tile < height; ++ty) {
      for (int tx = 0; tx * tile < width; ++tx) {
        if ((tx + ty) % 2 != cls) continue;
        const double cx = std::min(width - 1.0, (tx + 0.5) * tile);
        const double cy = std::min(height - 1.0, (ty + 0.5) * tile);
        const FloatMap bump = gaussian_bump(width, height, cx, cy, tile / 5.0);
        for (std::size_t i = 0; i < act.data.size(); ++i) {
          act.data[i] = std::max(act.data[i], bump.data[i]);
        }
      }
    }
    acts.emplace_back(cls + 1, std::move(act));
  }
  return write_fixture(dir, img, m, acts, gt, table);
}

}  // namespace

FixtureVariant parse_fixture_variant(const std::string& name) {
  if (name == "two-blob") return FixtureVariant::two_blob;
  if (name == "checker") return FixtureVariant::checker;
  if (name == "gradient") return FixtureVariant::gradient;
  raise(errc::bad_config, "unknown fixture variant '" + name + "'");
}

const char* fixture_variant_name(FixtureVariant v) {
  switch (v) {
    case FixtureVariant::two_blob: return "two-blob";
    case FixtureVariant::checker: return "checker";
    case FixtureVariant::gradient: return "gradient";
  }
  return "?";
}

FixturePaths synthesize_fixture(const std::filesystem::path& dir, std::uint64_t seed,
                                FixtureVariant variant, int width, int height) {
  if (width < 32 || height < 32) {
    raise(errc::value_out_of_range, "fixtures need at least 32x32 pixels");
  }
  std::mt19937_64 rng(seed);
  switch (variant) {
    case FixtureVariant::two_blob:
      return make_two_blob(dir, rng, width, height, /*gradient_bg=*/false);
    case FixtureVariant::gradient:
      return make_two_blob(dir, rng, width, height, /*gradient_bg=*/true);
    case FixtureVariant::checker:
      return make_checker(dir, rng, width, height);
  }
  raise(errc::bad_config, "unreachable fixture variant");
}

}  // namespace segdiff
