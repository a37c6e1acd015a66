#include "vip/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vip/error.hpp"
#include "vip/rng.hpp"

namespace vip {
namespace {

constexpr int kCheckerCell = 8;
constexpr double kCheckerLo = 0.35;
constexpr double kCheckerHi = 0.65;
constexpr int kNoiseLattice = 5;

double bilinear_lattice(uint64_t seed, double wx, double wy, uint64_t tag, int cell) {
  const double gx = wx / cell;
  const double gy = wy / cell;
  const int64_t ix = static_cast<int64_t>(std::floor(gx));
  const int64_t iy = static_cast<int64_t>(std::floor(gy));
  const double fx = gx - ix;
  const double fy = gy - iy;
  const double v00 = hash_unit(seed, ix, iy, tag);
  const double v10 = hash_unit(seed, ix + 1, iy, tag);
  const double v01 = hash_unit(seed, ix, iy + 1, tag);
  const double v11 = hash_unit(seed, ix + 1, iy + 1, tag);
  return (v00 * (1 - fx) + v10 * fx) * (1 - fy) + (v01 * (1 - fx) + v11 * fx) * fy;
}

// Background value at world coordinates; gray (same in every channel).
double background_value(const SceneSpec& spec, int wx, int wy) {
  switch (spec.background) {
    case SceneSpec::Background::Checker: {
      const auto cell = [](int v) {
        int c = v / kCheckerCell;
        if (v < 0 && v % kCheckerCell != 0) --c;  // floor division
        return c;
      };
      const bool on = ((cell(wx) + cell(wy)) & 1) != 0;
      return on ? kCheckerHi : kCheckerLo;
    }
    case SceneSpec::Background::Gradient: {
      // pure ramp kept inside [0.15, 0.85] over the whole panned extent
      const int span = spec.width + spec.height +
                       spec.frames * (std::abs(spec.pan_x) + std::abs(spec.pan_y)) + 1;
      return 0.15 + 0.7 * (static_cast<double>(wx + wy) + span) / (3.0 * span);
    }
    case SceneSpec::Background::Noise: {
      const double base = bilinear_lattice(spec.seed, wx, wy, 101, kNoiseLattice * 2);
      const double detail = bilinear_lattice(spec.seed, wx, wy, 202, kNoiseLattice);
      return std::clamp(0.25 + 0.4 * base + 0.15 * detail, 0.0, 1.0);
    }
  }
  return 0.5;
}

struct Footprint {
  // inclusive-exclusive box pre-clipping plus a shape predicate
  int x0, y0, sx, sy;
  SpriteSpec::Shape shape;

  bool contains(int x, int y) const {
    if (x < x0 || y < y0 || x >= x0 + sx || y >= y0 + sy) return false;
    if (shape == SpriteSpec::Shape::Rect) return true;
    const double cx = x0 + (sx - 1) / 2.0;
    const double cy = y0 + (sy - 1) / 2.0;
    const double rx = sx / 2.0;
    const double ry = sy / 2.0;
    const double nx = (x - cx) / rx;
    const double ny = (y - cy) / ry;
    return nx * nx + ny * ny <= 1.0 + 1e-12;
  }
};

Footprint sprite_footprint(const SpriteSpec& s, int t) {
  return {s.x0 + t * s.vx, s.y0 + t * s.vy, s.size_x, s.size_y, s.shape};
}

Footprint shadow_footprint(const SpriteSpec& s, const ShadowSpec& sh, int t) {
  const int sx = std::max(1, static_cast<int>(std::lround(s.size_x * sh.scale)));
  const int sy = std::max(1, static_cast<int>(std::lround(s.size_y * sh.scale)));
  return {s.x0 + t * s.vx + sh.dx, s.y0 + t * s.vy + sh.dy, sx, sy, s.shape};
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  if (spec.frames < 1) fail(ErrorCode::InvalidArgument, "frame count must be >= 1");
  if (spec.height < 1 || spec.width < 1)
    fail(ErrorCode::InvalidArgument, "frame dimensions must be positive");
  for (const SpriteSpec& s : spec.sprites) {
    if (s.size_x < 1 || s.size_y < 1) fail(ErrorCode::InvalidArgument, "sprite size must be positive");
    if (s.size_x > spec.width || s.size_y > spec.height)
      fail(ErrorCode::InvalidArgument, "sprite larger than frame");
    if (s.shadow && !(s.shadow->darkening > 0.0 && s.shadow->darkening < 1.0))
      fail(ErrorCode::InvalidArgument, "shadow darkening must be in (0,1)");
  }

  // resolve sprite colors deterministically from the seed where unspecified
  std::vector<std::array<double, 3>> colors(spec.sprites.size());
  for (size_t i = 0; i < spec.sprites.size(); ++i) {
    const SpriteSpec& s = spec.sprites[i];
    for (int c = 0; c < 3; ++c) {
      colors[i][c] = s.color[c] >= 0.0
                         ? std::clamp(s.color[c], 0.0, 1.0)
                         : 0.1 + 0.8 * hash_unit(spec.seed, static_cast<int64_t>(i), c, 777);
    }
  }

  Scene scene;
  scene.clip.fps = spec.fps;
  scene.plate.fps = spec.fps;
  const int F = spec.frames, H = spec.height, W = spec.width;
  scene.sprite_masks = MaskSeq::zeros(F, H, W);
  scene.shadow_masks = MaskSeq::zeros(F, H, W);

  for (int t = 0; t < F; ++t) {
    Frame plate = Frame::zeros(H, W, 3);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const double v = background_value(spec, x + t * spec.pan_x, y + t * spec.pan_y);
        for (int c = 0; c < 3; ++c) plate.at(y, x, c) = v;
      }

    Frame frame = plate;
    Mask& smask = scene.sprite_masks.masks[t];
    Mask& hmask = scene.shadow_masks.masks[t];

    // shadows first (multiplicative darkening, compounding where they overlap)
    for (const SpriteSpec& s : spec.sprites) {
      if (!s.shadow) continue;
      const Footprint fp = shadow_footprint(s, *s.shadow, t);
      const int yb = std::max(0, fp.y0), ye = std::min(H, fp.y0 + fp.sy);
      const int xb = std::max(0, fp.x0), xe = std::min(W, fp.x0 + fp.sx);
      for (int y = yb; y < ye; ++y)
        for (int x = xb; x < xe; ++x)
          if (fp.contains(x, y)) {
            for (int c = 0; c < 3; ++c) frame.at(y, x, c) *= 1.0 - s.shadow->darkening;
            hmask.set(y, x, 1);
          }
    }

    // sprites on top, painter's order
    for (size_t i = 0; i < spec.sprites.size(); ++i) {
      const Footprint fp = sprite_footprint(spec.sprites[i], t);
      const int yb = std::max(0, fp.y0), ye = std::min(H, fp.y0 + fp.sy);
      const int xb = std::max(0, fp.x0), xe = std::min(W, fp.x0 + fp.sx);
      for (int y = yb; y < ye; ++y)
        for (int x = xb; x < xe; ++x)
          if (fp.contains(x, y)) {
            for (int c = 0; c < 3; ++c) frame.at(y, x, c) = colors[i][c];
            smask.set(y, x, 1);
          }
    }

    // visible shadows exclude pixels covered by sprites
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        if (smask.at(y, x)) hmask.set(y, x, 0);

    scene.plate.frames.push_back(std::move(plate));
    scene.clip.frames.push_back(std::move(frame));
  }
  return scene;
}

std::vector<int> anchor_frames(const MaskSeq& masks, int n_anchor) {
  const int F = masks.frame_count();
  if (n_anchor < 1 || n_anchor > F)
    fail(ErrorCode::InvalidArgument, "need 1 <= n_anchor <= frame count");
  std::vector<int> idx;
  if (n_anchor == 1) {
    idx.push_back(0);
    return idx;
  }
  for (int i = 0; i < n_anchor; ++i)
    idx.push_back(static_cast<int>(static_cast<int64_t>(i) * (F - 1) / (n_anchor - 1)));
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

}  // namespace vip
