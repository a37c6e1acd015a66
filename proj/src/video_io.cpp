#include "vip/video_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "vip/error.hpp"

namespace vip {
namespace {

namespace fs = std::filesystem;

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%05d.png", index);
  return buf;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Reads an 8-bit PNG as H*W*want_channels bytes (1 = gray, 3 = RGB).
// Palette/16-bit/alpha inputs are normalized by libpng transforms.
std::vector<uint8_t> read_png_bytes(const fs::path& file, int want_channels, int& h, int& w) {
  FilePtr fp(std::fopen(file.c_str(), "rb"));
  if (!fp) fail(ErrorCode::IoError, "cannot open " + file.string());

  uint8_t sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
    fail(ErrorCode::DecodeError, "not a PNG file: " + file.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::DecodeError, "libpng init failed");
  }
  std::vector<uint8_t> out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::DecodeError, "PNG decode failed: " + file.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (want_channels == 3)
    png_set_gray_to_rgb(png);
  else
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);  // default luma weights
  png_read_update_info(png, info);

  h = static_cast<int>(png_get_image_height(png, info));
  w = static_cast<int>(png_get_image_width(png, info));
  const size_t stride = png_get_rowbytes(png, info);
  if (stride != static_cast<size_t>(w) * want_channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::DecodeError, "unexpected PNG layout: " + file.string());
  }
  out.resize(static_cast<size_t>(h) * stride);
  rows.resize(h);
  for (int y = 0; y < h; ++y) rows[y] = out.data() + static_cast<size_t>(y) * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png_bytes(const fs::path& file, const std::vector<uint8_t>& bytes, int h, int w,
                     int channels) {
  FilePtr fp(std::fopen(file.c_str(), "wb"));
  if (!fp) fail(ErrorCode::IoError, "cannot write " + file.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoError, "PNG encode failed: " + file.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(h);
  const size_t stride = static_cast<size_t>(w) * channels;
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(bytes.data() + static_cast<size_t>(y) * stride);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

uint8_t quantize(double v) {
  double q = std::lround(std::fmin(std::fmax(v, 0.0), 1.0) * 255.0);
  return static_cast<uint8_t>(q);
}

// Native channel count of a PNG (1 for grayscale, 3 otherwise).
int probe_png_channels(const fs::path& file) {
  FilePtr fp(std::fopen(file.c_str(), "rb"));
  if (!fp) fail(ErrorCode::IoError, "cannot open " + file.string());
  uint8_t sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
    fail(ErrorCode::DecodeError, "not a PNG file: " + file.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::DecodeError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::DecodeError, "PNG decode failed: " + file.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  png_destroy_read_struct(&png, &info, nullptr);
  return (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) ? 1 : 3;
}

// Enumerates frame_%05d.png files and enforces contiguity from index 0.
int scan_frame_count(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::IoError, "not a directory: " + dir.string());
  std::vector<bool> present;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    int idx = -1;
    if (std::sscanf(name.c_str(), "frame_%5d.png", &idx) != 1) continue;
    if (name != frame_name(idx)) continue;
    if (idx >= static_cast<int>(present.size())) present.resize(idx + 1, false);
    present[idx] = true;
  }
  if (present.empty()) fail(ErrorCode::MissingFrame, "no frame_%05d.png files in " + dir.string());
  for (int i = 0; i < static_cast<int>(present.size()); ++i)
    if (!present[i])
      fail(ErrorCode::MissingFrame, "missing frame index " + std::to_string(i) + " in " + dir.string());
  return static_cast<int>(present.size());
}

}  // namespace

VideoClip load_clip_dir(const fs::path& dir) {
  const int count = scan_frame_count(dir);
  const int channels = probe_png_channels(dir / frame_name(0));
  VideoClip clip;
  clip.frames.reserve(count);
  for (int i = 0; i < count; ++i) {
    Frame f = load_frame_png(dir / frame_name(i), channels);
    if (!clip.frames.empty() && !f.same_shape(clip.frames[0]))
      fail(ErrorCode::DimensionMismatch, "frame " + std::to_string(i) + " has mixed dimensions");
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

MaskSeq load_mask_dir(const fs::path& dir) {
  const int count = scan_frame_count(dir);
  MaskSeq seq;
  seq.masks.reserve(count);
  for (int i = 0; i < count; ++i) {
    int h = 0, w = 0;
    std::vector<uint8_t> bytes = read_png_bytes(dir / frame_name(i), 1, h, w);
    Mask m = Mask::zeros(h, w);
    for (size_t k = 0; k < bytes.size(); ++k) m.data[k] = bytes[k] >= 128 ? 1 : 0;
    if (!seq.masks.empty() && !m.same_shape(seq.masks[0]))
      fail(ErrorCode::DimensionMismatch, "mask " + std::to_string(i) + " has mixed dimensions");
    seq.masks.push_back(std::move(m));
  }
  return seq;
}

void save_clip_dir(const VideoClip& clip, const fs::path& dir) {
  clip.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) fail(ErrorCode::IoError, "cannot create " + dir.string());
  for (int i = 0; i < clip.frame_count(); ++i)
    save_frame_png(clip.frames[i], dir / frame_name(i));
}

void save_mask_dir(const MaskSeq& masks, const fs::path& dir) {
  masks.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) fail(ErrorCode::IoError, "cannot create " + dir.string());
  for (int i = 0; i < masks.frame_count(); ++i) {
    const Mask& m = masks.masks[i];
    std::vector<uint8_t> bytes(m.data.size());
    for (size_t k = 0; k < bytes.size(); ++k) bytes[k] = m.data[k] ? 255 : 0;
    write_png_bytes(dir / frame_name(i), bytes, m.height, m.width, 1);
  }
}

void save_frame_png(const Frame& frame, const fs::path& file) {
  std::vector<uint8_t> bytes(frame.data.size());
  for (size_t k = 0; k < bytes.size(); ++k) bytes[k] = quantize(frame.data[k]);
  write_png_bytes(file, bytes, frame.height, frame.width, frame.channels);
}

Frame load_frame_png(const fs::path& file, int want_channels) {
  int h = 0, w = 0;
  std::vector<uint8_t> bytes = read_png_bytes(file, want_channels, h, w);
  Frame f = Frame::zeros(h, w, want_channels);
  for (size_t k = 0; k < bytes.size(); ++k) f.data[k] = bytes[k] / 255.0;
  return f;
}

}  // namespace vip
