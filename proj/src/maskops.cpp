#include "vip/maskops.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "vip/error.hpp"

namespace vip {

BBox InstanceMask::bbox() const {
  BBox b;
  b.x0 = pixels.width;
  b.y0 = pixels.height;
  b.x1 = -1;
  b.y1 = -1;
  for (int y = 0; y < pixels.height; ++y)
    for (int x = 0; x < pixels.width; ++x)
      if (pixels.at(y, x)) {
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
      }
  return b;
}

std::pair<double, double> InstanceMask::centroid() const {
  double sx = 0.0, sy = 0.0;
  int n = 0;
  for (int y = 0; y < pixels.height; ++y)
    for (int x = 0; x < pixels.width; ++x)
      if (pixels.at(y, x)) {
        sx += x;
        sy += y;
        ++n;
      }
  return {sx / n, sy / n};
}

void PairingParams::validate() const {
  if (!(area_ratio_min > 0.0) || !(area_ratio_min < area_ratio_max))
    fail(ErrorCode::InvalidArgument, "need 0 < area_ratio_min < area_ratio_max");
  if (!(lower_band_fraction > 0.0) || lower_band_fraction > 1.0)
    fail(ErrorCode::InvalidArgument, "lower_band_fraction must be in (0,1]");
  if (touch_margin < 0) fail(ErrorCode::InvalidArgument, "touch_margin must be >= 0");
}

namespace {

struct Band {
  // real-valued rect [x0,x1] x [y_top,y_bot], already including the margin
  // extension below the bbox
  double x0, x1, y_top, y_bot;
};

Band lower_band(const BBox& human_box, const PairingParams& p) {
  Band b;
  b.x0 = human_box.x0;
  b.x1 = human_box.x1;
  b.y_bot = human_box.y1 + p.touch_margin;
  b.y_top = human_box.y1 + 1 - p.lower_band_fraction * human_box.height();
  return b;
}

// Chebyshev distance from a pixel to the band rectangle (0 when inside).
double band_distance(const Band& b, int x, int y) {
  const double dx = std::max({b.x0 - x, 0.0, x - b.x1});
  const double dy = std::max({b.y_top - y, 0.0, y - b.y_bot});
  return std::max(dx, dy);
}

}  // namespace

PairingResult pair_shadows(const std::vector<InstanceMask>& humans,
                           const std::vector<InstanceMask>& shadows,
                           const PairingParams& params) {
  params.validate();
  PairingResult res;

  const InstanceMask* ref = !humans.empty() ? &humans[0] : (!shadows.empty() ? &shadows[0] : nullptr);
  auto check_mask = [&](const InstanceMask& m) {
    if (m.frame_index != ref->frame_index)
      fail(ErrorCode::InvalidArgument, "masks must share a frame index");
    if (!m.pixels.same_shape(ref->pixels))
      fail(ErrorCode::DimensionMismatch, "mask dimensions disagree");
  };
  for (const InstanceMask& m : humans) check_mask(m);
  for (const InstanceMask& m : shadows) check_mask(m);

  struct HumanInfo {
    bool usable = false;
    int area = 0;
    Band band{};
    double cx = 0.0, cy = 0.0;
  };
  std::vector<HumanInfo> infos(humans.size());
  for (size_t h = 0; h < humans.size(); ++h) {
    const int area = humans[h].area();
    if (area == 0) {
      res.warnings.push_back("human " + std::to_string(h) + " has empty mask; skipped");
      continue;
    }
    HumanInfo info;
    info.usable = true;
    info.area = area;
    info.band = lower_band(humans[h].bbox(), params);
    std::tie(info.cx, info.cy) = humans[h].centroid();
    infos[h] = info;
  }

  for (size_t s = 0; s < shadows.size(); ++s) {
    const int s_area = shadows[s].area();
    if (s_area == 0) {
      res.warnings.push_back("shadow " + std::to_string(s) + " has empty mask; skipped");
      res.unpaired_shadows.push_back(static_cast<int>(s));
      continue;
    }
    const auto [scx, scy] = shadows[s].centroid();

    int best_h = -1;
    int best_inter = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t h = 0; h < humans.size(); ++h) {
      const HumanInfo& info = infos[h];
      if (!info.usable) continue;
      const double ratio = static_cast<double>(s_area) / info.area;
      if (ratio < params.area_ratio_min || ratio > params.area_ratio_max) continue;

      int inter = 0;
      bool touches = false;
      const Mask& px = shadows[s].pixels;
      for (int y = 0; y < px.height; ++y)
        for (int x = 0; x < px.width; ++x) {
          if (!px.at(y, x)) continue;
          const double d = band_distance(info.band, x, y);
          if (d == 0.0) ++inter;
          if (d <= params.touch_margin) touches = true;
        }
      if (!touches) continue;

      const double dx = scx - info.cx, dy = scy - info.cy;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (inter > best_inter || (inter == best_inter && dist < best_dist)) {
        best_h = static_cast<int>(h);
        best_inter = inter;
        best_dist = dist;
      }
    }
    if (best_h >= 0)
      res.pairs.push_back({best_h, static_cast<int>(s)});
    else
      res.unpaired_shadows.push_back(static_cast<int>(s));
  }
  return res;
}

InstanceMask merge_instance(const InstanceMask& human, const InstanceMask* shadow,
                            const std::vector<InstanceMask>& belongings) {
  InstanceMask out = human;
  out.kind = InstanceMask::Kind::Human;
  auto accumulate = [&](const InstanceMask& other) {
    if (other.frame_index != human.frame_index)
      fail(ErrorCode::InvalidArgument, "merge requires a common frame index");
    if (!other.pixels.same_shape(out.pixels))
      fail(ErrorCode::DimensionMismatch, "mask dimensions disagree");
    for (size_t i = 0; i < out.pixels.data.size(); ++i)
      out.pixels.data[i] |= other.pixels.data[i];
  };
  if (shadow) accumulate(*shadow);
  for (const InstanceMask& b : belongings) accumulate(b);
  return out;
}

Mask dilate(const Mask& mask, int radius) {
  if (radius < 0) fail(ErrorCode::InvalidArgument, "radius must be >= 0");
  if (radius == 0) return mask;
  const int H = mask.height, W = mask.width;
  // separable max filter: horizontal then vertical
  Mask horiz = Mask::zeros(H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      uint8_t v = 0;
      for (int d = -radius; d <= radius && !v; ++d) {
        const int nx = x + d;
        if (nx >= 0 && nx < W && mask.at(y, nx)) v = 1;
      }
      horiz.set(y, x, v);
    }
  Mask out = Mask::zeros(H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      uint8_t v = 0;
      for (int d = -radius; d <= radius && !v; ++d) {
        const int ny = y + d;
        if (ny >= 0 && ny < H && horiz.at(ny, x)) v = 1;
      }
      out.set(y, x, v);
    }
  return out;
}

namespace {

// Nearest-neighbor backward warp of a binary mask one frame along `step`.
Mask warp_mask_nn(const Mask& mask, const FlowField& step) {
  Mask out = Mask::zeros(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      const size_t pi = step.idx(y, x);
      const int sx = x + static_cast<int>(std::lround(step.u[pi]));
      const int sy = y + static_cast<int>(std::lround(step.v[pi]));
      if (sx < 0 || sy < 0 || sx >= mask.width || sy >= mask.height) continue;
      out.set(y, x, mask.at(sy, sx));
    }
  return out;
}

}  // namespace

MaskSeq propagate_masks(const VideoClip& clip, const std::vector<std::pair<int, Mask>>& anchors,
                        const FlowPairs& flows, int dilate_radius) {
  if (anchors.empty()) fail(ErrorCode::InvalidArgument, "at least one anchor is required");
  const int F = clip.frame_count(), H = clip.height(), W = clip.width();
  if (static_cast<int>(flows.forward.size()) != F - 1 ||
      static_cast<int>(flows.backward.size()) != F - 1)
    fail(ErrorCode::DimensionMismatch, "flows must cover all adjacent pairs");
  for (const auto& [idx, mask] : anchors) {
    if (idx < 0 || idx >= F) fail(ErrorCode::InvalidArgument, "anchor index out of range");
    if (mask.height != H || mask.width != W)
      fail(ErrorCode::DimensionMismatch, "anchor mask dimensions disagree");
  }

  MaskSeq out = MaskSeq::zeros(F, H, W);
  for (int t = 0; t < F; ++t) {
    // nearest anchor, ties toward the earlier one
    int best = -1;
    for (const auto& [idx, mask] : anchors) {
      (void)mask;
      if (best < 0 || std::abs(t - idx) < std::abs(t - best) ||
          (std::abs(t - idx) == std::abs(t - best) && idx < best))
        best = idx;
    }
    const Mask* anchor_mask = nullptr;
    for (const auto& [idx, mask] : anchors)
      if (idx == best) anchor_mask = &mask;

    if (best == t) {
      out.masks[t] = *anchor_mask;  // anchors keep their masks exactly
      continue;
    }
    Mask cur = *anchor_mask;
    if (best < t) {
      for (int s = best + 1; s <= t; ++s) cur = warp_mask_nn(cur, flows.backward[s - 1]);
    } else {
      for (int s = best - 1; s >= t; --s) cur = warp_mask_nn(cur, flows.forward[s]);
    }
    out.masks[t] = dilate(cur, dilate_radius);
  }
  return out;
}

std::vector<Mask> connected_components(const Mask& mask) {
  const int H = mask.height, W = mask.width;
  std::vector<int> label(static_cast<size_t>(H) * W, -1);
  std::vector<Mask> comps;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      if (!mask.at(y, x) || label[static_cast<size_t>(y) * W + x] >= 0) continue;
      const int id = static_cast<int>(comps.size());
      comps.push_back(Mask::zeros(H, W));
      std::deque<std::pair<int, int>> queue{{y, x}};
      label[static_cast<size_t>(y) * W + x] = id;
      while (!queue.empty()) {
        const auto [cy, cx] = queue.front();
        queue.pop_front();
        comps[id].set(cy, cx, 1);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (ny < 0 || nx < 0 || ny >= H || nx >= W) continue;
            if (!mask.at(ny, nx) || label[static_cast<size_t>(ny) * W + nx] >= 0) continue;
            label[static_cast<size_t>(ny) * W + nx] = id;
            queue.push_back({ny, nx});
          }
      }
    }
  return comps;
}

}  // namespace vip
