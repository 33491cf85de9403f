#include <doctest.h>

#include <cstring>
#include <random>

#include "segdiff/image.hpp"
#include "test_helpers.hpp"

using namespace segdiff;

namespace {

RawImage single_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RawImage img = RawImage::create(1, 1);
  img.data = {r, g, b};
  return img;
}

LabImage lab_pixel(double l, double a, double b) {
  LabImage img;
  img.width = img.height = 1;
  img.data = {l, a, b};
  return img;
}

}  // namespace

TEST_SUITE_BEGIN("image");

TEST_CASE("white maps to L=100 a=0 b=0") {
  const LabImage lab = rgb_to_lab(single_pixel(255, 255, 255));
  CHECK(std::abs(lab.data[0] - 100.0) < 1e-3);
  CHECK(std::abs(lab.data[1]) < 1e-3);
  CHECK(std::abs(lab.data[2]) < 1e-3);
  CHECK_FALSE(lab.normalized);
}

TEST_CASE("black maps to the origin") {
  const LabImage lab = rgb_to_lab(single_pixel(0, 0, 0));
  CHECK(std::abs(lab.data[0]) < 1e-3);
  CHECK(std::abs(lab.data[1]) < 1e-3);
  CHECK(std::abs(lab.data[2]) < 1e-3);
}

TEST_CASE("pure red matches the frozen conversion values") {
  // computed once from the standard sRGB D65 formulas, independent of this
  // implementation
  const LabImage lab = rgb_to_lab(single_pixel(255, 0, 0));
  CHECK(lab.data[0] == doctest::Approx(53.24079414130722).epsilon(1e-9));
  CHECK(lab.data[1] == doctest::Approx(80.09245959641109).epsilon(1e-9));
  CHECK(lab.data[2] == doctest::Approx(67.20319651585301).epsilon(1e-9));
}

TEST_CASE("lab round-trips back to sRGB within one unit per channel") {
  std::mt19937_64 rng(20240811);
  std::uniform_int_distribution<int> channel(0, 255);
  for (int i = 0; i < 100000; ++i) {
    const int r = channel(rng), g = channel(rng), b = channel(rng);
    double l, a, bb;
    srgb_pixel_to_lab(std::uint8_t(r), std::uint8_t(g), std::uint8_t(b), l, a, bb);
    double rr, gg, bbb;
    testutil::lab_to_srgb(l, a, bb, rr, gg, bbb);
    REQUIRE(std::abs(rr - r) <= 1.0);
    REQUIRE(std::abs(gg - g) <= 1.0);
    REQUIRE(std::abs(bbb - b) <= 1.0);
  }
}

TEST_CASE("normalize_lab endpoint mapping") {
  const LabImage hi = normalize_lab(lab_pixel(100.0, 0.0, 0.0));
  CHECK(hi.data[0] == doctest::Approx(1.0));
  CHECK(hi.data[1] == doctest::Approx(128.0 / 255.0));
  CHECK(hi.data[2] == doctest::Approx(128.0 / 255.0));
  CHECK(hi.normalized);

  const LabImage lo = normalize_lab(lab_pixel(0.0, -128.0, -128.0));
  CHECK(lo.data[0] == doctest::Approx(0.0));
  CHECK(lo.data[1] == doctest::Approx(0.0));
  CHECK(lo.data[2] == doctest::Approx(0.0));

  const LabImage mid = normalize_lab(lab_pixel(50.0, 127.0, -1.0));
  CHECK(mid.data[0] == doctest::Approx(0.5));
  CHECK(mid.data[1] == doctest::Approx(1.0));
  CHECK(mid.data[2] == doctest::Approx(127.0 / 255.0));
}

TEST_CASE("normalizing twice is rejected") {
  const LabImage once = normalize_lab(lab_pixel(50.0, 0.0, 0.0));
  try {
    normalize_lab(once);
    FAIL("expected DoubleNormalize");
  } catch (const Error& e) {
    CHECK(e.code() == errc::double_normalize);
  }
}

TEST_CASE("normalized output stays inside the unit cube") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> channel(0, 255);
  RawImage img = RawImage::create(17, 13);
  for (auto& v : img.data) v = std::uint8_t(channel(rng));
  const LabImage lab = normalize_lab(rgb_to_lab(img));
  for (double v : lab.data) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("fmap 1x1 file layout and reload") {
  testutil::TempDir dir("fmap");
  FloatMap m = FloatMap::create(1, 1, 0.5f);
  const auto path = dir / "half.fmap";
  save_fmap(m, path);
  CHECK(std::filesystem::file_size(path) == 21);
  const FloatMap back = load_fmap(path);
  CHECK(back.width == 1);
  CHECK(back.height == 1);
  CHECK(back.data[0] == 0.5f);
}

TEST_CASE("fmap rejects zero dimensions") {
  testutil::TempDir dir("fmap");
  std::string bytes = "FMAP0001";
  const char zeros[8] = {0, 0, 0, 0, 1, 0, 0, 0};  // w=0, h=1
  bytes.append(zeros, 8);
  bytes.push_back(0x01);
  const auto path = dir / "zero.fmap";
  testutil::write_file_bytes(path, bytes);
  CHECK_THROWS_AS(load_fmap(path), Error);
  try {
    load_fmap(path);
  } catch (const Error& e) {
    CHECK(e.code() == errc::dimension_overflow);
  }
}

TEST_CASE("fmap endpoint value 1.0 round-trips exactly") {
  testutil::TempDir dir("fmap");
  FloatMap m = FloatMap::create(3, 2, 1.0f);
  const auto path = dir / "ones.fmap";
  save_fmap(m, path);
  const FloatMap back = load_fmap(path);
  CHECK(back.data == m.data);
}

TEST_CASE("fmap error taxonomy") {
  testutil::TempDir dir("fmap");

  const auto bad_magic = dir / "bad_magic.fmap";
  testutil::write_file_bytes(bad_magic, "NOTFMAP0XXXXXXXXXXXXXXXXX");
  CHECK_THROWS_AS(load_fmap(bad_magic), Error);

  FloatMap m = FloatMap::create(4, 4, 0.25f);
  const auto good = dir / "good.fmap";
  save_fmap(m, good);
  std::string bytes = testutil::read_file_bytes(good);

  const auto truncated = dir / "truncated.fmap";
  testutil::write_file_bytes(truncated, bytes.substr(0, bytes.size() - 10));
  try {
    load_fmap(truncated);
    FAIL("expected TruncatedPayload");
  } catch (const Error& e) {
    CHECK(e.code() == errc::truncated_payload);
  }

  const auto trailing = dir / "trailing.fmap";
  testutil::write_file_bytes(trailing, bytes + "junk");
  try {
    load_fmap(trailing);
    FAIL("expected BadFormat");
  } catch (const Error& e) {
    CHECK(e.code() == errc::bad_format);
  }

  // 2.0f payload value
  std::string out_of_range = bytes;
  const float two = 2.0f;
  std::memcpy(out_of_range.data() + 16, &two, 4);
  const auto bad_value = dir / "bad_value.fmap";
  testutil::write_file_bytes(bad_value, out_of_range);
  try {
    load_fmap(bad_value);
    FAIL("expected ValueOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == errc::value_out_of_range);
  }

  FloatMap invalid = FloatMap::create(2, 2, 0.0f);
  invalid.data[3] = 1.5f;
  CHECK_THROWS_AS(save_fmap(invalid, dir / "invalid.fmap"), Error);
}

TEST_CASE("fmap round-trip is bit-exact over random maps") {
  testutil::TempDir dir("fmap");
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::uniform_int_distribution<int> side(1, 23);
  for (int trial = 0; trial < 100; ++trial) {
    FloatMap m = FloatMap::create(side(rng), side(rng));
    for (auto& v : m.data) v = unit(rng);
    if (!m.data.empty()) {
      m.data.front() = 0.0f;
      m.data.back() = 1.0f;
    }
    const auto path = dir / "roundtrip.fmap";
    save_fmap(m, path);
    const FloatMap back = load_fmap(path);
    REQUIRE(back.width == m.width);
    REQUIRE(back.height == m.height);
    REQUIRE(std::memcmp(back.data.data(), m.data.data(), m.data.size() * 4) == 0);
  }
}

TEST_CASE("label png basics") {
  testutil::TempDir dir("labelpng");
  ClassTable table;
  table.names = {"background", "a", "b"};

  LabelMap zeros = LabelMap::create(2, 2, table);
  const auto path = dir / "zeros.png";
  save_label_png(zeros, path);
  const LabelMap back = load_label_png(path, table);
  CHECK(back.width == 2);
  CHECK(back.height == 2);
  for (auto v : back.data) CHECK(v == 0);
}

TEST_CASE("label png index beyond the class table is rejected") {
  testutil::TempDir dir("labelpng");
  ClassTable wide;
  wide.names = {"background", "a", "b", "c", "d", "e"};
  LabelMap map = LabelMap::create(2, 2, wide);
  map.data = {0, 5, 0, 0};
  const auto path = dir / "five.png";
  save_label_png(map, path);

  ClassTable narrow;
  narrow.names = {"background", "a", "b"};
  try {
    load_label_png(path, narrow);
    FAIL("expected IndexOutOfTable");
  } catch (const Error& e) {
    CHECK(e.code() == errc::index_out_of_table);
  }
  // but fine when 5 is declared as the ignore index
  const LabelMap ignored = load_label_png(path, narrow, 5);
  CHECK(ignored.data[1] == 5);
}

TEST_CASE("rgb png is not an indexed label map") {
  testutil::TempDir dir("labelpng");
  RawImage img = RawImage::create(2, 2);
  const auto path = dir / "rgb.png";
  save_image_png(img, path);
  ClassTable table;
  table.names = {"background"};
  try {
    load_label_png(path, table);
    FAIL("expected NonIndexedImage");
  } catch (const Error& e) {
    CHECK(e.code() == errc::non_indexed_image);
  }
}

TEST_CASE("label png round-trip preserves indices for random fixtures") {
  testutil::TempDir dir("labelpng");
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 200)(rng);
    ClassTable table;
    table.names.push_back("background");
    for (int c = 1; c < k; ++c) table.names.push_back("class" + std::to_string(c));
    LabelMap map = LabelMap::create(std::uniform_int_distribution<int>(1, 31)(rng),
                                    std::uniform_int_distribution<int>(1, 31)(rng), table);
    std::uniform_int_distribution<int> label(0, k - 1);
    for (auto& v : map.data) v = std::uint8_t(label(rng));
    const auto path = dir / "rt.png";
    save_label_png(map, path);
    const LabelMap back = load_label_png(path, table);
    REQUIRE(back.data == map.data);
  }
}

TEST_CASE("rgb png round-trip") {
  testutil::TempDir dir("rgbpng");
  std::mt19937_64 rng(5);
  RawImage img = RawImage::create(19, 7);
  std::uniform_int_distribution<int> channel(0, 255);
  for (auto& v : img.data) v = std::uint8_t(channel(rng));
  const auto path = dir / "img.png";
  save_image_png(img, path);
  const RawImage back = load_image_png(path);
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.data == img.data);
}

TEST_CASE("class table parsing") {
  testutil::TempDir dir("classtable");
  const auto path = dir / "classes.txt";
  testutil::write_file_bytes(path, "0\tbackground\n1\tcat\n2\tdog\n");
  const ClassTable table = load_class_table(path);
  REQUIRE(table.size() == 3);
  CHECK(table.name(1) == "cat");

  save_class_table(table, dir / "copy.txt");
  const ClassTable copy = load_class_table(dir / "copy.txt");
  CHECK(copy.names == table.names);

  testutil::write_file_bytes(path, "0\tnotbackground\n");
  CHECK_THROWS_AS(load_class_table(path), Error);
  testutil::write_file_bytes(path, "0\tbackground\n2\tdog\n");
  CHECK_THROWS_AS(load_class_table(path), Error);
  testutil::write_file_bytes(path, "0 background\n");
  CHECK_THROWS_AS(load_class_table(path), Error);
}

TEST_SUITE_END();
