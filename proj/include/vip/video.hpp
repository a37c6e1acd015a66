#pragma once

#include <cstdint>
#include <vector>

#include "vip/error.hpp"

namespace vip {

// Single frame, row-major interleaved channels, values in [0,1].
struct Frame {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  static Frame zeros(int h, int w, int c) {
    Frame f;
    f.height = h;
    f.width = w;
    f.channels = c;
    f.data.assign(static_cast<size_t>(h) * w * c, 0.0);
    return f;
  }
  static Frame constant(int h, int w, int c, double value) {
    Frame f = zeros(h, w, c);
    f.data.assign(f.data.size(), value);
    return f;
  }

  double at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const Frame& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  void validate() const;
};

struct VideoClip {
  std::vector<Frame> frames;
  double fps = 24.0;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int height() const { return frames.empty() ? 0 : frames[0].height; }
  int width() const { return frames.empty() ? 0 : frames[0].width; }
  int channels() const { return frames.empty() ? 0 : frames[0].channels; }

  void validate() const;
};

// Single binary map; 1 = hole (to inpaint), 0 = known.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  static Mask zeros(int h, int w) {
    Mask m;
    m.height = h;
    m.width = w;
    m.data.assign(static_cast<size_t>(h) * w, 0);
    return m;
  }

  uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  void set(int y, int x, uint8_t v) { data[static_cast<size_t>(y) * width + x] = v; }

  bool same_shape(const Mask& o) const { return height == o.height && width == o.width; }
  size_t count() const;        // number of hole pixels
  bool empty_holes() const { return count() == 0; }
};

struct MaskSeq {
  std::vector<Mask> masks;

  int frame_count() const { return static_cast<int>(masks.size()); }
  int height() const { return masks.empty() ? 0 : masks[0].height; }
  int width() const { return masks.empty() ? 0 : masks[0].width; }

  static MaskSeq zeros(int f, int h, int w) {
    MaskSeq s;
    s.masks.assign(f, Mask::zeros(h, w));
    return s;
  }
  void validate() const;
};

// Latent-scale soft known-map in [0,1]; 1 = fully known, 0 = fully hole.
struct KnownMap {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  double at(int f, int y, int x) const {
    return data[(static_cast<size_t>(f) * height + y) * width + x];
  }
  double& at(int f, int y, int x) {
    return data[(static_cast<size_t>(f) * height + y) * width + x];
  }
};

// Zeroes hole pixels: out = in where hole = 0, 0.0 where hole = 1.
VideoClip apply_mask(const VideoClip& clip, const MaskSeq& holes);

// Area-average of the known indicator (1 - hole) over factor x factor blocks.
// Non-divisible dimensions are padded with hole = 1 before averaging.
KnownMap downscale_mask(const MaskSeq& holes, int factor);

void check_same_shape(const VideoClip& clip, const MaskSeq& holes);

}  // namespace vip
