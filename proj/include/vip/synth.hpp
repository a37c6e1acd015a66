#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vip/video.hpp"

namespace vip {

struct ShadowSpec {
  int dx = 2;
  int dy = 2;
  double scale = 1.0;
  double darkening = 0.4;  // shadow pixel = plate * (1 - darkening)
};

struct SpriteSpec {
  enum class Shape { Rect, Ellipse };
  Shape shape = Shape::Rect;
  int size_x = 8;
  int size_y = 8;
  int x0 = 0;
  int y0 = 0;
  int vx = 0;  // pixels/frame
  int vy = 0;
  // negative components mean "derive a color from the scene seed"
  double color[3] = {-1.0, -1.0, -1.0};
  std::optional<ShadowSpec> shadow;
};

struct SceneSpec {
  uint64_t seed = 0;
  int frames = 24;
  int height = 64;
  int width = 64;
  enum class Background { Checker, Noise, Gradient } background = Background::Checker;
  int pan_x = 0;  // camera pan, pixels/frame
  int pan_y = 0;
  double fps = 24.0;
  std::vector<SpriteSpec> sprites;
};

struct Scene {
  VideoClip clip;         // plate + shadows + sprites
  VideoClip plate;        // scene without sprites and shadows (ground truth)
  MaskSeq sprite_masks;   // union of sprite footprints
  MaskSeq shadow_masks;   // union of visible shadow footprints (sprites excluded)
};

// Deterministic given the spec (including seed). All motion is integer-pixel
// per frame, so masks and plates translate exactly between frames.
Scene generate_scene(const SceneSpec& spec);

// Evenly spaced anchor indices including frame 0; for n > 1 the i-th anchor is
// floor(i*(F-1)/(n-1)), which places the last anchor at F-1.
std::vector<int> anchor_frames(const MaskSeq& masks, int n_anchor);

}  // namespace vip
