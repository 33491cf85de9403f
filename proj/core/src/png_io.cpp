#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <vector>

#include "segdiff/image.hpp"

namespace segdiff {

namespace {

struct PngRead {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngRead() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWrite {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWrite() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

void open_reader(PngRead& ctx, const std::filesystem::path& path) {
  ctx.fp = std::fopen(path.string().c_str(), "rb");
  if (!ctx.fp) {
    raise(errc::io_failure, "cannot open " + path.string());
  }
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    raise(errc::bad_format, path.string() + " is not a PNG file");
  }
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
  if (!ctx.png || !ctx.info) {
    raise(errc::io_failure, "libpng allocation failed");
  }
}

void open_writer(PngWrite& ctx, const std::filesystem::path& path) {
  ctx.fp = std::fopen(path.string().c_str(), "wb");
  if (!ctx.fp) {
    raise(errc::io_failure, "cannot open " + path.string() + " for writing");
  }
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
  if (!ctx.png || !ctx.info) {
    raise(errc::io_failure, "libpng allocation failed");
  }
}

void check_png_dims(png_uint_32 w, png_uint_32 h) {
  if (w == 0 || h == 0 || std::uint64_t(w) * h > kMaxRasterPixels) {
    raise(errc::dimension_overflow, "PNG dimensions invalid");
  }
}

}  // namespace

RawImage load_image_png(const std::filesystem::path& path) {
  PngRead ctx;
  RawImage img;
  std::vector<png_bytep> rows;
  open_reader(ctx, path);

  // libpng reports errors via longjmp; everything from here to the end of
  // the reads must stay in this frame.
  if (setjmp(png_jmpbuf(ctx.png))) {
    raise(errc::bad_format, "libpng failed reading " + path.string());
  }
  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
  const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  const int color_type = png_get_color_type(ctx.png, ctx.info);
  check_png_dims(width, height);
  if (bit_depth == 16) {
    raise(errc::bad_format, path.string() + ": 16-bit PNGs are not supported");
  }

  // fold every supported layout down to plain RGB8 in one update pass
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(ctx.png);
  }
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(ctx.png);
  }
  png_set_strip_alpha(ctx.png);
  png_set_interlace_handling(ctx.png);
  png_read_update_info(ctx.png, ctx.info);
  if (png_get_channels(ctx.png, ctx.info) != 3 || png_get_bit_depth(ctx.png, ctx.info) != 8) {
    raise(errc::bad_format, path.string() + ": unsupported PNG layout");
  }

  img = RawImage::create(static_cast<int>(width), static_cast<int>(height));
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = img.data.data() + std::size_t(y) * width * 3;
  }
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return img;
}

void save_image_png(const RawImage& img, const std::filesystem::path& path) {
  if (img.width < 1 || img.height < 1 || img.data.size() != img.pixel_count() * 3) {
    raise(errc::dimension_mismatch, "RawImage data length does not match dimensions");
  }
  PngWrite ctx;
  std::vector<png_bytep> rows;
  open_writer(ctx, path);
  if (setjmp(png_jmpbuf(ctx.png))) {
    raise(errc::io_failure, "libpng failed writing " + path.string());
  }
  png_init_io(ctx.png, ctx.fp);
  png_set_compression_level(ctx.png, 6);
  png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(img.data.data() + std::size_t(y) * img.width * 3);
  }
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, ctx.info);
  if (std::fflush(ctx.fp) != 0) {
    raise(errc::io_failure, "write failed for " + path.string());
  }
}

LabelMap load_label_png(const std::filesystem::path& path, const ClassTable& table,
                        std::optional<int> ignore_index) {
  PngRead ctx;
  LabelMap map;
  std::vector<png_bytep> rows;
  open_reader(ctx, path);
  if (setjmp(png_jmpbuf(ctx.png))) {
    raise(errc::bad_format, "libpng failed reading " + path.string());
  }
  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
  const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  const int color_type = png_get_color_type(ctx.png, ctx.info);
  check_png_dims(width, height);
  if (color_type != PNG_COLOR_TYPE_PALETTE || bit_depth > 8) {
    raise(errc::non_indexed_image, path.string() + " is not an 8-bit indexed PNG");
  }
  if (bit_depth < 8) png_set_packing(ctx.png);
  png_set_interlace_handling(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  map = LabelMap::create(static_cast<int>(width), static_cast<int>(height), table);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = map.data.data() + std::size_t(y) * width;
  }
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);

  for (std::size_t i = 0; i < map.data.size(); ++i) {
    const int index = map.data[i];
    if (index >= table.size() && !(ignore_index && index == *ignore_index)) {
      raise(errc::index_out_of_table,
            path.string() + ": palette index " + std::to_string(index) + " exceeds class table");
    }
  }
  return map;
}

void save_label_png(const LabelMap& map, const std::filesystem::path& path) {
  if (map.width < 1 || map.height < 1 || map.data.size() != map.pixel_count()) {
    raise(errc::dimension_mismatch, "LabelMap data length does not match dimensions");
  }
  if (map.classes.size() < 1 || map.classes.size() > 256) {
    raise(errc::bad_format, "class table size must be in [1,256] for indexed PNG");
  }
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    if (map.data[i] >= map.classes.size()) {
      raise(errc::index_out_of_table,
            "label index " + std::to_string(map.data[i]) + " exceeds class table");
    }
  }
  PngWrite ctx;
  std::vector<png_color> palette(static_cast<std::size_t>(map.classes.size()));
  for (int i = 0; i < map.classes.size(); ++i) {
    class_palette_color(i, palette[i].red, palette[i].green, palette[i].blue);
  }
  std::vector<png_bytep> rows;
  open_writer(ctx, path);
  if (setjmp(png_jmpbuf(ctx.png))) {
    raise(errc::io_failure, "libpng failed writing " + path.string());
  }
  png_init_io(ctx.png, ctx.fp);
  png_set_compression_level(ctx.png, 6);
  png_set_IHDR(ctx.png, ctx.info, map.width, map.height, 8, PNG_COLOR_TYPE_PALETTE,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_PLTE(ctx.png, ctx.info, palette.data(), static_cast<int>(palette.size()));
  png_write_info(ctx.png, ctx.info);
  rows.resize(map.height);
  for (int y = 0; y < map.height; ++y) {
    rows[y] = const_cast<png_bytep>(map.data.data() + std::size_t(y) * map.width);
  }
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, ctx.info);
  if (std::fflush(ctx.fp) != 0) {
    raise(errc::io_failure, "write failed for " + path.string());
  }
}

void class_palette_color(int index, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
  r = g = b = 0;
  int id = index;
  for (int shift = 7; shift >= 0 && id != 0; --shift) {
    r = static_cast<std::uint8_t>(r | ((id & 1) << shift));
    g = static_cast<std::uint8_t>(g | (((id >> 1) & 1) << shift));
    b = static_cast<std::uint8_t>(b | (((id >> 2) & 1) << shift));
    id >>= 3;
  }
}

}  // namespace segdiff
