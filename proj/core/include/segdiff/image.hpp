#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segdiff/errors.hpp"

namespace segdiff {

/// Allocation guard applied to every raster read from disk.
inline constexpr std::uint64_t kMaxRasterPixels = std::uint64_t(1) << 26;

/// 8-bit sRGB raster, row-major RGB triples.
struct RawImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width*height*3

  static RawImage create(int width, int height);
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t* pixel(int x, int y) { return data.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* pixel(int x, int y) const {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

/// CIELAB raster. Channels are (L, a, b); after normalize_lab every channel
/// lies in [0,1] and the normalized flag is set.
struct LabImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // width*height*3
  bool normalized = false;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  double* pixel(int x, int y) { return data.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const double* pixel(int x, int y) const {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

/// Scalar field in [0,1]; carries segmentation maps and class activations.
struct FloatMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // width*height

  static FloatMap create(int width, int height, float fill = 0.0f);
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Class index table. Index 0 is always "background".
struct ClassTable {
  std::vector<std::string> names;

  int size() const { return static_cast<int>(names.size()); }
  const std::string& name(int index) const { return names[static_cast<std::size_t>(index)]; }
};

/// Per-pixel class indices plus the table they refer to.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width*height class indices
  ClassTable classes;

  static LabelMap create(int width, int height, ClassTable classes, std::uint8_t fill = 0);
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

// ---------------------------------------------------------------------------
// Color conversion

/// Standard sRGB (D65) to CIELAB, per pixel. Output is unnormalized:
/// L in [0,100], a/b roughly in [-128,127].
LabImage rgb_to_lab(const RawImage& img);

/// Rescale Lab channels onto [0,1]: L/100, (a+128)/255, (b+128)/255.
/// Throws DoubleNormalize if already normalized.
LabImage normalize_lab(const LabImage& img);

/// Single-pixel conversion, exposed for tests and palette work.
void srgb_pixel_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                       double& l_out, double& a_out, double& b_out);

// ---------------------------------------------------------------------------
// FMAP container
//
// Little-endian layout:
//   8 bytes  magic "FMAP0001"
//   u32      width      (>= 1)
//   u32      height     (>= 1)
//   f32[],   width*height row-major payload, every value in [0,1]
//   u8       version byte 0x01
//
// Round-trips are bit-exact: payload floats are stored and reloaded with
// their exact bit patterns.

FloatMap load_fmap(const std::filesystem::path& path);
void save_fmap(const FloatMap& map, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// PNG I/O

/// Load an 8-bit RGB(A)/gray PNG as RGB. 16-bit files are rejected.
RawImage load_image_png(const std::filesystem::path& path);
void save_image_png(const RawImage& img, const std::filesystem::path& path);

/// Load an 8-bit indexed PNG; palette index i is class index i.
/// Indices must be < table size, except a pixel equal to `ignore_index`
/// (evaluation void regions) which is passed through untouched.
LabelMap load_label_png(const std::filesystem::path& path, const ClassTable& table,
                        std::optional<int> ignore_index = std::nullopt);
void save_label_png(const LabelMap& map, const std::filesystem::path& path);

/// Deterministic palette color for a class index (VOC-style bit shuffle).
void class_palette_color(int index, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b);

// ---------------------------------------------------------------------------
// Class table file: one "index<TAB>name" line per class, index 0 must be
// named "background".

ClassTable load_class_table(const std::filesystem::path& path);
void save_class_table(const ClassTable& table, const std::filesystem::path& path);

}  // namespace segdiff
