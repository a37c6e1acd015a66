#pragma once

#include <vector>

#include "vip/video.hpp"

namespace vip {

constexpr int kLatentScale = 8;
constexpr int kLatentChannels = 4;

// Per-frame latent tensor, laid out [frame][channel][y][x].
struct LatentClip {
  int frames = 0;
  int channels = 0;
  int height = 0;
  int width = 0;
  // pixel-space metadata carried through encode so decode can restore it
  int pixel_height = 0;
  int pixel_width = 0;
  int pixel_channels = 3;
  double fps = 24.0;
  std::vector<double> data;

  static LatentClip zeros(int f, int c, int h, int w) {
    LatentClip l;
    l.frames = f;
    l.channels = c;
    l.height = h;
    l.width = w;
    l.data.assign(static_cast<size_t>(f) * c * h * w, 0.0);
    return l;
  }

  size_t per_frame() const { return static_cast<size_t>(channels) * height * width; }
  double at(int f, int c, int y, int x) const {
    return data[((static_cast<size_t>(f) * channels + c) * height + y) * width + x];
  }
  double& at(int f, int c, int y, int x) {
    return data[((static_cast<size_t>(f) * channels + c) * height + y) * width + x];
  }
  bool same_shape(const LatentClip& o) const {
    return frames == o.frames && channels == o.channels && height == o.height && width == o.width;
  }
  void validate_finite() const;
};

// Fixed linear codec: each 8x8 block of the frame's luma maps to four
// channels {mean, horizontal slope, vertical slope, bilinear cross term}.
// RGB input is projected to luma with Rec.601 weights; decode replicates the
// reconstructed luma across the source channels and clamps to [0,1].
// Frames whose dimensions are not multiples of 8 are edge-padded before the
// transform and cropped back after decode.
LatentClip encode(const VideoClip& clip);
VideoClip decode(const LatentClip& lat);

// Gathers a subset of frames into a new latent (window slicing).
LatentClip gather_frames(const LatentClip& lat, const std::vector<int>& frame_indices);

}  // namespace vip
