#pragma once

#include "vip/latent.hpp"
#include "vip/video.hpp"

namespace vip {

struct RefSpec {
  enum class Policy { MinHoleArea, Explicit } policy = Policy::MinHoleArea;
  int index = 0;  // used by Explicit
  enum class Position { Prepend, Adjacent } position = Position::Prepend;
};

// MinHoleArea picks the frame with the fewest hole pixels (ties: smallest
// index); Explicit passes spec.index through after a range check.
int select_reference(const MaskSeq& holes, const RefSpec& spec);

// Single-frame inpaint used for the reference: the flow-completed frame with
// its residual holes harmonically filled. The raw frame/hole pair is part of
// the interface for callers that bring their own single-frame inpainter.
Frame inpaint_reference(const Frame& frame, const Mask& hole, const Frame& flow_completed,
                        const Mask& residual);

struct InsertResult {
  VideoClip clip;   // F+1 frames
  MaskSeq holes;    // F+1 masks; the reference slot is all-known
  int ref_slot = 0;
};

InsertResult insert_reference(const VideoClip& clip, const MaskSeq& holes, const Frame& ref,
                              const RefSpec& spec);

// Drops the reference slot's latent frame, preserving the remaining order.
LatentClip remove_reference(const LatentClip& lat, int ref_slot);

}  // namespace vip
