#include "segdiff/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace segdiff {

namespace {

constexpr char kFmapMagic[8] = {'F', 'M', 'A', 'P', '0', '0', '0', '1'};
constexpr std::uint8_t kFmapVersion = 0x01;

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    raise(errc::dimension_overflow, "dimensions must be >= 1");
  }
  if (std::uint64_t(width) * std::uint64_t(height) > kMaxRasterPixels) {
    raise(errc::dimension_overflow, "raster too large");
  }
}

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 24) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

}  // namespace

RawImage RawImage::create(int width, int height) {
  check_dims(width, height);
  RawImage img;
  img.width = width;
  img.height = height;
  img.data.assign(static_cast<std::size_t>(width) * height * 3, 0);
  return img;
}

FloatMap FloatMap::create(int width, int height, float fill) {
  check_dims(width, height);
  FloatMap m;
  m.width = width;
  m.height = height;
  m.data.assign(static_cast<std::size_t>(width) * height, fill);
  return m;
}

LabelMap LabelMap::create(int width, int height, ClassTable classes, std::uint8_t fill) {
  check_dims(width, height);
  LabelMap m;
  m.width = width;
  m.height = height;
  m.classes = std::move(classes);
  m.data.assign(static_cast<std::size_t>(width) * height, fill);
  return m;
}

// ---------------------------------------------------------------------------
// sRGB (D65) -> CIELAB

namespace {

// IEC 61966-2-1 sRGB matrix and the matching D65 reference white.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhite[3] = {0.95047, 1.00000, 1.08883};

double srgb_linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double eps = 216.0 / 24389.0;
  constexpr double kappa = 24389.0 / 27.0;
  return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

}  // namespace

void srgb_pixel_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                       double& l_out, double& a_out, double& b_out) {
  const double rl = srgb_linearize(r / 255.0);
  const double gl = srgb_linearize(g / 255.0);
  const double bl = srgb_linearize(b / 255.0);
  double xyz[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = (kRgbToXyz[i][0] * rl + kRgbToXyz[i][1] * gl + kRgbToXyz[i][2] * bl) / kWhite[i];
  }
  const double fx = lab_f(xyz[0]);
  const double fy = lab_f(xyz[1]);
  const double fz = lab_f(xyz[2]);
  l_out = 116.0 * fy - 16.0;
  a_out = 500.0 * (fx - fy);
  b_out = 200.0 * (fy - fz);
}

LabImage rgb_to_lab(const RawImage& img) {
  check_dims(img.width, img.height);
  if (img.data.size() != img.pixel_count() * 3) {
    raise(errc::dimension_mismatch, "RawImage data length does not match dimensions");
  }
  LabImage out;
  out.width = img.width;
  out.height = img.height;
  out.normalized = false;
  out.data.resize(img.data.size());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    srgb_pixel_to_lab(img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2],
                      out.data[3 * i], out.data[3 * i + 1], out.data[3 * i + 2]);
  }
  return out;
}

LabImage normalize_lab(const LabImage& img) {
  if (img.normalized) {
    raise(errc::double_normalize, "LabImage is already normalized");
  }
  LabImage out;
  out.width = img.width;
  out.height = img.height;
  out.normalized = true;
  out.data.resize(img.data.size());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double l = img.data[3 * i] / 100.0;
    const double a = (img.data[3 * i + 1] + 128.0) / 255.0;
    const double b = (img.data[3 * i + 2] + 128.0) / 255.0;
    out.data[3 * i] = std::clamp(l, 0.0, 1.0);
    out.data[3 * i + 1] = std::clamp(a, 0.0, 1.0);
    out.data[3 * i + 2] = std::clamp(b, 0.0, 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FMAP

FloatMap load_fmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(errc::io_failure, "cannot open " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    raise(errc::io_failure, "read failed for " + path.string());
  }
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kFmapMagic, 8) != 0) {
    raise(errc::bad_magic, path.string() + " is not an FMAP file");
  }
  if (bytes.size() < 16) {
    raise(errc::truncated_payload, "FMAP header truncated: " + path.string());
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t width = get_u32le(p + 8);
  const std::uint32_t height = get_u32le(p + 12);
  if (width == 0 || height == 0 || std::uint64_t(width) * height > kMaxRasterPixels) {
    raise(errc::dimension_overflow, "FMAP dimensions invalid: " + path.string());
  }
  const std::uint64_t count = std::uint64_t(width) * height;
  const std::uint64_t expected = 16 + count * 4 + 1;
  if (bytes.size() < expected) {
    raise(errc::truncated_payload, "FMAP payload truncated: " + path.string());
  }
  if (bytes.size() != expected) {
    raise(errc::bad_format, "FMAP has trailing bytes: " + path.string());
  }
  if (std::uint8_t(bytes[expected - 1]) != kFmapVersion) {
    raise(errc::bad_magic, "FMAP version byte mismatch: " + path.string());
  }
  FloatMap map;
  map.width = static_cast<int>(width);
  map.height = static_cast<int>(height);
  map.data.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(get_u32le(p + 16 + i * 4));
    if (!(v >= 0.0f && v <= 1.0f)) {  // also rejects NaN
      raise(errc::value_out_of_range, "FMAP value outside [0,1] at index " + std::to_string(i));
    }
    map.data[i] = v;
  }
  return map;
}

void save_fmap(const FloatMap& map, const std::filesystem::path& path) {
  check_dims(map.width, map.height);
  if (map.data.size() != map.pixel_count()) {
    raise(errc::dimension_mismatch, "FloatMap data length does not match dimensions");
  }
  std::string bytes;
  bytes.reserve(17 + map.data.size() * 4);
  bytes.append(kFmapMagic, 8);
  put_u32le(bytes, static_cast<std::uint32_t>(map.width));
  put_u32le(bytes, static_cast<std::uint32_t>(map.height));
  for (std::size_t i = 0; i < map.data.size(); ++i) {
    const float v = map.data[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      raise(errc::value_out_of_range, "FloatMap value outside [0,1] at index " + std::to_string(i));
    }
    put_u32le(bytes, std::bit_cast<std::uint32_t>(v));
  }
  bytes.push_back(char(kFmapVersion));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(errc::io_failure, "cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    raise(errc::io_failure, "write failed for " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Class tables

ClassTable load_class_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(errc::io_failure, "cannot open " + path.string());
  }
  std::vector<std::pair<int, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      raise(errc::bad_format,
            path.string() + ":" + std::to_string(line_no) + ": expected index<TAB>name");
    }
    int index = 0;
    try {
      std::size_t used = 0;
      index = std::stoi(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
      raise(errc::bad_format,
            path.string() + ":" + std::to_string(line_no) + ": bad class index");
    }
    entries.emplace_back(index, line.substr(tab + 1));
  }
  if (entries.empty()) {
    raise(errc::bad_format, path.string() + ": empty class table");
  }
  ClassTable table;
  table.names.assign(entries.size(), std::string());
  std::vector<bool> seen(entries.size(), false);
  for (const auto& [index, name] : entries) {
    if (index < 0 || index >= static_cast<int>(entries.size()) || seen[index]) {
      raise(errc::bad_format, path.string() + ": class indices must be unique and dense from 0");
    }
    seen[index] = true;
    table.names[index] = name;
  }
  if (table.names[0] != "background") {
    raise(errc::bad_format, path.string() + ": index 0 must be named 'background'");
  }
  return table;
}

void save_class_table(const ClassTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    raise(errc::io_failure, "cannot open " + path.string() + " for writing");
  }
  for (int i = 0; i < table.size(); ++i) {
    out << i << '\t' << table.names[i] << '\n';
  }
  if (!out) {
    raise(errc::io_failure, "write failed for " + path.string());
  }
}

}  // namespace segdiff
