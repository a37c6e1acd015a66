#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "vip/video.hpp"

namespace vip {

// Dense displacement field from frame `from_index` toward `to_index`:
// content at (x,y) in the source frame appears at (x+u, y+v) in the target.
struct FlowField {
  int from_index = -1;
  int to_index = -1;
  int height = 0;
  int width = 0;
  std::vector<double> u, v;
  std::vector<uint8_t> valid;

  static FlowField zeros(int h, int w) {
    FlowField f;
    f.height = h;
    f.width = w;
    f.u.assign(static_cast<size_t>(h) * w, 0.0);
    f.v.assign(static_cast<size_t>(h) * w, 0.0);
    f.valid.assign(static_cast<size_t>(h) * w, 1);
    return f;
  }
  size_t idx(int y, int x) const { return static_cast<size_t>(y) * width + x; }
};

struct FlowParams {
  int block = 8;
  int radius = 7;
};

// Exhaustive block matching. Blocks fully outside `exclude` get the integer
// displacement within +/-radius minimizing the sum of absolute differences
// (ties: smallest |u|+|v|, then lexicographic (u,v)). Blocks that touch
// `exclude` are marked valid = 0 and carry the componentwise median of the
// valid block motions as a fallback estimate, so propagation chains can step
// across untracked regions.
FlowField estimate_flow(const Frame& a, const Frame& b, const Mask* exclude,
                        const FlowParams& params);

// Backward warping with bilinear sampling; coverage = 0 where the sample
// footprint leaves the frame or the flow there is invalid.
std::pair<Frame, Mask> warp(const Frame& frame, const FlowField& flow);

// Adjacent-pair flows in both directions: forward[t] is t -> t+1 and
// backward[t] is t+1 -> t.
struct FlowPairs {
  std::vector<FlowField> forward;
  std::vector<FlowField> backward;
};

FlowPairs estimate_clip_flows(const VideoClip& clip, const MaskSeq* holes,
                              const FlowParams& params);

// Exact flows for a known global translation (test/benchmark constructor).
FlowPairs translation_flows(int frames, int height, int width, int dx, int dy);

struct PropagateResult {
  VideoClip clip;
  MaskSeq residual;
};

// For every hole pixel, follows flow chains outward (preferring the shorter
// chain, ties toward the earlier frame) until the tracked location lands on a
// known pixel with trusted flow, then copies that value. Unresolvable pixels
// stay holes in `residual`.
PropagateResult propagate_pixels(const VideoClip& clip, const MaskSeq& holes,
                                 const FlowPairs& flows, int max_chain = 0);

struct FillResult {
  Frame frame;
  bool all_hole_fallback = false;
};

// Discrete harmonic fill: hole pixels are relaxed to the mean of their 4
// neighbors (Jacobi sweeps) until the largest per-sweep change drops below
// 1e-4 or 10*max(H,W) sweeps have run. Known pixels are never modified. An
// all-hole frame is filled with the constant 0.5 and flagged.
FillResult fill_holes(const Frame& frame, const Mask& hole);

// Debug dump: header {from,to,H,W} as little-endian int32, then row-major
// (u,v) as little-endian float32 pairs followed by one validity byte per
// pixel.
void write_flow(const FlowField& flow, const std::filesystem::path& file);
FlowField read_flow(const std::filesystem::path& file);

}  // namespace vip
