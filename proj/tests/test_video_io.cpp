#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vip/error.hpp"
#include "vip/rng.hpp"
#include "vip/video.hpp"
#include "vip/video_io.hpp"

using namespace vip;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vip_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

VideoClip random_clip(int f, int h, int w, int c, uint64_t seed) {
  Rng rng(seed);
  VideoClip clip;
  for (int i = 0; i < f; ++i) {
    Frame fr = Frame::zeros(h, w, c);
    for (double& v : fr.data) v = rng.uniform01();
    clip.frames.push_back(std::move(fr));
  }
  return clip;
}

}  // namespace

TEST_CASE("clip save/load round trip stays within 8-bit quantization") {
  const fs::path dir = temp_dir("roundtrip");
  const VideoClip clip = random_clip(3, 24, 16, 3, 42);
  save_clip_dir(clip, dir);
  const VideoClip back = load_clip_dir(dir);
  REQUIRE(back.frame_count() == 3);
  CHECK(back.height() == 24);
  CHECK(back.width() == 16);
  CHECK(back.channels() == 3);
  double max_err = 0.0;
  for (int f = 0; f < 3; ++f)
    for (size_t i = 0; i < clip.frames[f].data.size(); ++i)
      max_err = std::max(max_err, std::fabs(clip.frames[f].data[i] - back.frames[f].data[i]));
  CHECK(max_err <= 1.0 / 255.0);
}

TEST_CASE("mask save/load round trip is exact") {
  const fs::path dir = temp_dir("mask_roundtrip");
  MaskSeq seq = MaskSeq::zeros(2, 9, 7);
  Rng rng(7);
  for (Mask& m : seq.masks)
    for (uint8_t& v : m.data) v = rng.uniform01() < 0.5 ? 0 : 1;
  save_mask_dir(seq, dir);
  const MaskSeq back = load_mask_dir(dir);
  REQUIRE(back.frame_count() == 2);
  for (int f = 0; f < 2; ++f) CHECK(back.masks[f].data == seq.masks[f].data);
}

TEST_CASE("all-255 mask loads as full hole") {
  const fs::path dir = temp_dir("full_hole");
  MaskSeq seq = MaskSeq::zeros(1, 4, 4);
  for (uint8_t& v : seq.masks[0].data) v = 1;
  save_mask_dir(seq, dir);
  const MaskSeq back = load_mask_dir(dir);
  CHECK(back.masks[0].count() == 16);
}

TEST_CASE("missing frame index is detected") {
  const fs::path dir = temp_dir("gap");
  const VideoClip clip = random_clip(3, 8, 8, 3, 1);
  save_clip_dir(clip, dir);
  fs::remove(dir / "frame_00001.png");
  try {
    load_clip_dir(dir);
    FAIL("expected MissingFrame");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFrame);
  }
}

TEST_CASE("mixed dimensions are rejected") {
  const fs::path dir = temp_dir("mixed");
  save_frame_png(Frame::constant(8, 8, 3, 0.5), dir / "frame_00000.png");
  save_frame_png(Frame::constant(9, 8, 3, 0.5), dir / "frame_00001.png");
  try {
    load_clip_dir(dir);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("non-PNG file is a decode error") {
  const fs::path dir = temp_dir("garbage");
  std::ofstream(dir / "frame_00000.png") << "not a png at all";
  try {
    load_clip_dir(dir);
    FAIL("expected DecodeError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DecodeError);
  }
}

TEST_CASE("empty clip cannot be saved") {
  const fs::path dir = temp_dir("empty");
  VideoClip clip;
  try {
    save_clip_dir(clip, dir);
    FAIL("expected EmptyClip");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyClip);
  }
}

TEST_CASE("apply_mask zeroes exactly the hole pixels") {
  VideoClip clip = random_clip(2, 6, 6, 3, 5);
  MaskSeq holes = MaskSeq::zeros(2, 6, 6);

  SUBCASE("no holes is the identity") {
    const VideoClip out = apply_mask(clip, holes);
    for (int f = 0; f < 2; ++f) CHECK(out.frames[f].data == clip.frames[f].data);
  }
  SUBCASE("all holes zero everything") {
    for (Mask& m : holes.masks) m.data.assign(m.data.size(), 1);
    const VideoClip out = apply_mask(clip, holes);
    for (int f = 0; f < 2; ++f)
      for (double v : out.frames[f].data) CHECK(v == 0.0);
  }
  SUBCASE("a single hole pixel zeroes only itself") {
    holes.masks[1].set(3, 4, 1);
    const VideoClip out = apply_mask(clip, holes);
    CHECK(out.frames[0].data == clip.frames[0].data);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x)
        for (int c = 0; c < 3; ++c) {
          if (y == 3 && x == 4)
            CHECK(out.frames[1].at(y, x, c) == 0.0);
          else
            CHECK(out.frames[1].at(y, x, c) == clip.frames[1].at(y, x, c));
        }
  }
  SUBCASE("idempotent") {
    holes.masks[0].set(1, 2, 1);
    const VideoClip once = apply_mask(clip, holes);
    const VideoClip twice = apply_mask(once, holes);
    for (int f = 0; f < 2; ++f) CHECK(twice.frames[f].data == once.frames[f].data);
  }
  SUBCASE("shape mismatch is rejected") {
    MaskSeq bad = MaskSeq::zeros(2, 5, 6);
    try {
      apply_mask(clip, bad);
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }
}

TEST_CASE("downscale_mask area-averages the known indicator") {
  SUBCASE("all-hole block gives 0, all-known gives 1") {
    MaskSeq holes = MaskSeq::zeros(1, 16, 16);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) holes.masks[0].set(y, x, 1);
    const KnownMap km = downscale_mask(holes, 8);
    CHECK(km.height == 2);
    CHECK(km.width == 2);
    CHECK(km.at(0, 0, 0) == 0.0);
    CHECK(km.at(0, 0, 1) == 1.0);
    CHECK(km.at(0, 1, 0) == 1.0);
    CHECK(km.at(0, 1, 1) == 1.0);
  }
  SUBCASE("16 hole pixels in an 8x8 block give 48/64") {
    MaskSeq holes = MaskSeq::zeros(1, 8, 8);
    int placed = 0;
    for (int y = 0; y < 8 && placed < 16; ++y)
      for (int x = 0; x < 8 && placed < 16; ++x) {
        holes.masks[0].set(y, x, 1);
        ++placed;
      }
    const KnownMap km = downscale_mask(holes, 8);
    CHECK(km.at(0, 0, 0) == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("mean of the known map equals 1 - hole fraction") {
    Rng rng(11);
    MaskSeq holes = MaskSeq::zeros(3, 24, 32);
    size_t hole_px = 0;
    for (Mask& m : holes.masks)
      for (uint8_t& v : m.data) {
        v = rng.uniform01() < 0.3 ? 1 : 0;
        hole_px += v;
      }
    const KnownMap km = downscale_mask(holes, 8);
    double mean = 0.0;
    for (double v : km.data) mean += v;
    mean /= static_cast<double>(km.data.size());
    const double hole_frac = static_cast<double>(hole_px) / (3.0 * 24 * 32);
    CHECK(mean == doctest::Approx(1.0 - hole_frac).epsilon(1e-12));
  }
  SUBCASE("factor must be positive") {
    MaskSeq holes = MaskSeq::zeros(1, 8, 8);
    try {
      downscale_mask(holes, 0);
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
    }
  }
}
