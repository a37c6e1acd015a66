#include "vip/refframe.hpp"

#include <algorithm>

#include "vip/error.hpp"
#include "vip/flow.hpp"

namespace vip {

int select_reference(const MaskSeq& holes, const RefSpec& spec) {
  const int F = holes.frame_count();
  if (F < 1) fail(ErrorCode::EmptyClip, "mask sequence has no frames");
  if (spec.policy == RefSpec::Policy::Explicit) {
    if (spec.index < 0 || spec.index >= F)
      fail(ErrorCode::InvalidArgument, "explicit reference index out of range");
    return spec.index;
  }
  int best = 0;
  size_t best_count = holes.masks[0].count();
  for (int f = 1; f < F; ++f) {
    const size_t c = holes.masks[f].count();
    if (c < best_count) {
      best = f;
      best_count = c;
    }
  }
  return best;
}

Frame inpaint_reference(const Frame& frame, const Mask& hole, const Frame& flow_completed,
                        const Mask& residual) {
  if (!frame.same_shape(flow_completed))
    fail(ErrorCode::DimensionMismatch, "frame and flow_completed shapes disagree");
  if (hole.height != frame.height || hole.width != frame.width ||
      !hole.same_shape(residual))
    fail(ErrorCode::DimensionMismatch, "mask shapes disagree");
  return fill_holes(flow_completed, residual).frame;
}

InsertResult insert_reference(const VideoClip& clip, const MaskSeq& holes, const Frame& ref,
                              const RefSpec& spec) {
  check_same_shape(clip, holes);
  if (!ref.same_shape(clip.frames[0]))
    fail(ErrorCode::DimensionMismatch, "reference frame shape disagrees");

  const int slot = spec.position == RefSpec::Position::Prepend
                       ? 0
                       : std::clamp(spec.index, 0, clip.frame_count());
  InsertResult out;
  out.clip = clip;
  out.holes = holes;
  out.ref_slot = slot;
  out.clip.frames.insert(out.clip.frames.begin() + slot, ref);
  out.holes.masks.insert(out.holes.masks.begin() + slot,
                         Mask::zeros(ref.height, ref.width));
  return out;
}

LatentClip remove_reference(const LatentClip& lat, int ref_slot) {
  if (ref_slot < 0 || ref_slot >= lat.frames)
    fail(ErrorCode::InvalidArgument, "reference slot out of range");
  std::vector<int> keep;
  keep.reserve(lat.frames - 1);
  for (int f = 0; f < lat.frames; ++f)
    if (f != ref_slot) keep.push_back(f);
  return gather_frames(lat, keep);
}

}  // namespace vip
