#include "vip/video.hpp"

#include <cmath>

#include "vip/error.hpp"

namespace vip {

void Frame::validate() const {
  if (height <= 0 || width <= 0 || (channels != 1 && channels != 3))
    fail(ErrorCode::InvalidArgument, "frame must be HxWx{1|3} with positive dims");
  if (data.size() != static_cast<size_t>(height) * width * channels)
    fail(ErrorCode::DimensionMismatch, "frame data length does not match H*W*C");
  for (double v : data)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      fail(ErrorCode::InvalidArgument, "frame values must be finite and in [0,1]");
}

void VideoClip::validate() const {
  if (frames.empty()) fail(ErrorCode::EmptyClip, "clip has no frames");
  if (!(fps > 0.0)) fail(ErrorCode::InvalidArgument, "fps must be positive");
  for (const Frame& f : frames) {
    f.validate();
    if (!f.same_shape(frames[0]))
      fail(ErrorCode::DimensionMismatch, "all frames must share H, W, C");
  }
}

size_t Mask::count() const {
  size_t n = 0;
  for (uint8_t v : data) n += (v != 0);
  return n;
}

void MaskSeq::validate() const {
  if (masks.empty()) fail(ErrorCode::EmptyClip, "mask sequence has no frames");
  for (const Mask& m : masks) {
    if (m.height != masks[0].height || m.width != masks[0].width)
      fail(ErrorCode::DimensionMismatch, "all masks must share H, W");
    if (m.data.size() != static_cast<size_t>(m.height) * m.width)
      fail(ErrorCode::DimensionMismatch, "mask data length does not match H*W");
    for (uint8_t v : m.data)
      if (v > 1) fail(ErrorCode::InvalidArgument, "mask values must be 0 or 1");
  }
}

void check_same_shape(const VideoClip& clip, const MaskSeq& holes) {
  if (clip.frame_count() != holes.frame_count() || clip.height() != holes.height() ||
      clip.width() != holes.width())
    fail(ErrorCode::DimensionMismatch, "clip and mask sequence shapes disagree");
}

VideoClip apply_mask(const VideoClip& clip, const MaskSeq& holes) {
  check_same_shape(clip, holes);
  VideoClip out = clip;
  const int c = clip.channels();
  for (int f = 0; f < clip.frame_count(); ++f) {
    Frame& fr = out.frames[f];
    const Mask& m = holes.masks[f];
    for (int y = 0; y < fr.height; ++y)
      for (int x = 0; x < fr.width; ++x)
        if (m.at(y, x))
          for (int ch = 0; ch < c; ++ch) fr.at(y, x, ch) = 0.0;
  }
  return out;
}

KnownMap downscale_mask(const MaskSeq& holes, int factor) {
  if (factor <= 0) fail(ErrorCode::InvalidArgument, "downscale factor must be positive");
  holes.validate();
  const int f_count = holes.frame_count();
  const int h_in = holes.height();
  const int w_in = holes.width();
  const int h_out = (h_in + factor - 1) / factor;
  const int w_out = (w_in + factor - 1) / factor;

  KnownMap km;
  km.frames = f_count;
  km.height = h_out;
  km.width = w_out;
  km.data.assign(static_cast<size_t>(f_count) * h_out * w_out, 0.0);

  const double inv_area = 1.0 / (static_cast<double>(factor) * factor);
  for (int f = 0; f < f_count; ++f) {
    const Mask& m = holes.masks[f];
    for (int by = 0; by < h_out; ++by) {
      for (int bx = 0; bx < w_out; ++bx) {
        int known = 0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            const int y = by * factor + dy;
            const int x = bx * factor + dx;
            // padding beyond the frame counts as hole = 1, i.e. not known
            if (y < h_in && x < w_in && m.at(y, x) == 0) ++known;
          }
        }
        km.at(f, by, bx) = known * inv_area;
      }
    }
  }
  return km;
}

}  // namespace vip
