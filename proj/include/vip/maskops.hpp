#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vip/flow.hpp"
#include "vip/video.hpp"

namespace vip {

struct BBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive; empty when x1 < x0
  bool valid() const { return x1 >= x0 && y1 >= y0; }
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
};

struct InstanceMask {
  enum class Kind { Human, Shadow };
  int frame_index = 0;
  Kind kind = Kind::Human;
  Mask pixels;

  BBox bbox() const;
  int area() const { return static_cast<int>(pixels.count()); }
  std::pair<double, double> centroid() const;  // (x, y); area must be > 0
};

struct PairingParams {
  double area_ratio_min = 0.05;
  double area_ratio_max = 3.0;
  double lower_band_fraction = 0.25;  // of the human bbox height
  int touch_margin = 3;               // pixels

  void validate() const;
};

struct PairingResult {
  std::vector<std::pair<int, int>> pairs;  // (human index, shadow index)
  std::vector<int> unpaired_shadows;
  std::vector<std::string> warnings;
};

// A shadow pairs with a human when (a) area(s)/area(h) lies in
// [area_ratio_min, area_ratio_max] and (b) the shadow mask intersects, or lies
// within touch_margin (Chebyshev) of, the band made of the bottom
// lower_band_fraction of the human bbox extended touch_margin pixels below it.
// Competing humans are ranked by band intersection, then centroid distance,
// then index. Each shadow pairs with at most one human.
PairingResult pair_shadows(const std::vector<InstanceMask>& humans,
                           const std::vector<InstanceMask>& shadows,
                           const PairingParams& params);

// Pixelwise union; result kind is Human.
InstanceMask merge_instance(const InstanceMask& human, const InstanceMask* shadow,
                            const std::vector<InstanceMask>& belongings);

// Morphological dilation with a square structuring element of side 2r+1,
// clipped at the frame border.
Mask dilate(const Mask& mask, int radius);

// Each non-anchor frame's mask is the nearest anchor's mask carried along the
// flow chain with nearest-neighbor warps (ties toward the earlier anchor),
// then dilated by `dilate_radius`. Anchor frames keep their masks exactly.
MaskSeq propagate_masks(const VideoClip& clip, const std::vector<std::pair<int, Mask>>& anchors,
                        const FlowPairs& flows, int dilate_radius = 2);

// 8-connected components of hole pixels (CLI helper for instance splitting).
std::vector<Mask> connected_components(const Mask& mask);

}  // namespace vip
