#pragma once

#include <filesystem>
#include <string>

#include "vip/video.hpp"

namespace vip {

// Directory interchange: <dir>/frame_%05d.png, contiguous from frame_00000.
// Clips are 8-bit PNGs mapped to [0,1] by /255; masks are 8-bit grayscale
// with 255 = hole, binarized at threshold 128 on load.

VideoClip load_clip_dir(const std::filesystem::path& dir);
MaskSeq load_mask_dir(const std::filesystem::path& dir);

void save_clip_dir(const VideoClip& clip, const std::filesystem::path& dir);
void save_mask_dir(const MaskSeq& masks, const std::filesystem::path& dir);

// Single-image helpers (Y-T slices, debug dumps).
void save_frame_png(const Frame& frame, const std::filesystem::path& file);
Frame load_frame_png(const std::filesystem::path& file, int want_channels);

}  // namespace vip
