#include "vip/latent.hpp"

#include <algorithm>
#include <cmath>

#include "vip/error.hpp"

namespace vip {
namespace {

constexpr int B = kLatentScale;
constexpr double kCenter = (B - 1) / 2.0;           // 3.5
constexpr double kSlopeNorm = 336.0;                // sum over block of dx^2 (= 8 * 42)
constexpr double kCrossNorm = 1764.0;               // sum over block of dx^2 * dy^2 (= 42 * 42)

constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;

double luma(const Frame& f, int y, int x) {
  if (f.channels == 1) return f.at(y, x, 0);
  return kLumaR * f.at(y, x, 0) + kLumaG * f.at(y, x, 1) + kLumaB * f.at(y, x, 2);
}

}  // namespace

void LatentClip::validate_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidLatent, "latent contains non-finite values");
}

LatentClip encode(const VideoClip& clip) {
  clip.validate();
  const int F = clip.frame_count();
  const int H = clip.height();
  const int W = clip.width();
  const int h = (H + B - 1) / B;
  const int w = (W + B - 1) / B;

  LatentClip lat = LatentClip::zeros(F, kLatentChannels, h, w);
  lat.pixel_height = H;
  lat.pixel_width = W;
  lat.pixel_channels = clip.channels();
  lat.fps = clip.fps;

  for (int f = 0; f < F; ++f) {
    const Frame& fr = clip.frames[f];
    for (int by = 0; by < h; ++by) {
      for (int bx = 0; bx < w; ++bx) {
        double mean = 0.0, gx = 0.0, gy = 0.0, cross = 0.0;
        for (int iy = 0; iy < B; ++iy) {
          // edge replication for blocks that overhang the frame
          const int y = std::min(by * B + iy, H - 1);
          const double dy = iy - kCenter;
          for (int ix = 0; ix < B; ++ix) {
            const int x = std::min(bx * B + ix, W - 1);
            const double dx = ix - kCenter;
            const double p = luma(fr, y, x);
            mean += p;
            gx += p * dx;
            gy += p * dy;
            cross += p * dx * dy;
          }
        }
        lat.at(f, 0, by, bx) = mean / (B * B);
        lat.at(f, 1, by, bx) = gx / kSlopeNorm;
        lat.at(f, 2, by, bx) = gy / kSlopeNorm;
        lat.at(f, 3, by, bx) = cross / kCrossNorm;
      }
    }
  }
  return lat;
}

VideoClip decode(const LatentClip& lat) {
  lat.validate_finite();
  if (lat.channels != kLatentChannels)
    fail(ErrorCode::InvalidLatent, "latent must have 4 channels");
  const int H = lat.pixel_height > 0 ? lat.pixel_height : lat.height * B;
  const int W = lat.pixel_width > 0 ? lat.pixel_width : lat.width * B;
  const int C = lat.pixel_channels;
  if (lat.height < (H + B - 1) / B || lat.width < (W + B - 1) / B)
    fail(ErrorCode::InvalidLatent, "latent grid too small for pixel dimensions");

  VideoClip clip;
  clip.fps = lat.fps;
  clip.frames.reserve(lat.frames);
  for (int f = 0; f < lat.frames; ++f) {
    Frame fr = Frame::zeros(H, W, C);
    for (int y = 0; y < H; ++y) {
      const int by = y / B;
      const double dy = (y - by * B) - kCenter;
      for (int x = 0; x < W; ++x) {
        const int bx = x / B;
        const double dx = (x - bx * B) - kCenter;
        double v = lat.at(f, 0, by, bx) + lat.at(f, 1, by, bx) * dx +
                   lat.at(f, 2, by, bx) * dy + lat.at(f, 3, by, bx) * dx * dy;
        v = std::clamp(v, 0.0, 1.0);
        for (int c = 0; c < C; ++c) fr.at(y, x, c) = v;
      }
    }
    clip.frames.push_back(std::move(fr));
  }
  return clip;
}

LatentClip gather_frames(const LatentClip& lat, const std::vector<int>& frame_indices) {
  LatentClip out = LatentClip::zeros(static_cast<int>(frame_indices.size()), lat.channels,
                                     lat.height, lat.width);
  out.pixel_height = lat.pixel_height;
  out.pixel_width = lat.pixel_width;
  out.pixel_channels = lat.pixel_channels;
  out.fps = lat.fps;
  const size_t n = lat.per_frame();
  for (size_t i = 0; i < frame_indices.size(); ++i) {
    const int f = frame_indices[i];
    if (f < 0 || f >= lat.frames) fail(ErrorCode::InvalidArgument, "frame index out of range");
    std::copy_n(lat.data.begin() + f * n, n, out.data.begin() + i * n);
  }
  return out;
}

}  // namespace vip
