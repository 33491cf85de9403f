#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "segdiff/image.hpp"

namespace segdiff {

enum class FixtureVariant { two_blob, checker, gradient };

FixtureVariant parse_fixture_variant(const std::string& name);  // "two-blob" etc.
const char* fixture_variant_name(FixtureVariant v);

/// Files written by synthesize_fixture.
struct FixturePaths {
  std::filesystem::path image;
  std::filesystem::path m;
  std::filesystem::path gt;
  std::filesystem::path classes;
  std::vector<std::pair<int, std::filesystem::path>> activations;
};

/// Write a deterministic, solvable end-to-end fixture: an image of
/// distinctly colored regions, a foreground map M (with boundary noise for
/// the two-blob variant), one blurred-center activation map per class, the
/// exact ground-truth label map and a class table. Identical seeds produce
/// byte-identical files.
FixturePaths synthesize_fixture(const std::filesystem::path& dir, std::uint64_t seed,
                                FixtureVariant variant, int width = 128, int height = 128);

}  // namespace segdiff
