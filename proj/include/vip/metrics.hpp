#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vip/flow.hpp"
#include "vip/fusion.hpp"
#include "vip/latent.hpp"
#include "vip/video.hpp"

namespace vip {

struct Report {
  double psnr = 0.0;
  double ssim = 0.0;
  double e_warp_x1e3 = 0.0;
  double tf = 0.0;
  double seam = 0.0;
  int fusion_ops = 0;
  double runtime_ms = 0.0;
  std::optional<std::vector<double>> per_frame_psnr;

  std::string to_json() const;
  static Report from_json(const std::string& text);
};

constexpr double kPsnrCap = 99.0;

// 10*log10(1/MSE) on [0,1] pixels, capped at 99 dB (cap returned when MSE=0).
double psnr(const VideoClip& a, const VideoClip& b);
double psnr_frame(const Frame& a, const Frame& b);

// Mean local SSIM: 11x11 Gaussian window (sigma 1.5), C1=0.01^2, C2=0.03^2 on
// the [0,1] range; per-frame mean over valid window positions and channels,
// then mean over frames.
double ssim(const VideoClip& a, const VideoClip& b);

struct WarpErrorResult {
  double value = 0.0;  // dimensionless mean squared error; report as value*1e3
  int zero_coverage_pairs = 0;
};

// Mean squared difference between frame t+1 and the flow-warped frame t over
// covered pixels, averaged over adjacent pairs. Uses flows.backward (t+1->t).
WarpErrorResult warping_error(const VideoClip& clip, const FlowPairs& flows);

// 100*(1 - mean adjacent-frame MAE), optionally restricted to static_mask
// (1 = evaluate here).
double temporal_flicker(const VideoClip& clip, const MaskSeq* static_mask = nullptr);

// Excess temporal discontinuity at window-boundary frames: the mean absolute
// adjacent-frame difference over boundary indices minus the same statistic
// over interior indices, floored at 0.
double seam_score(const VideoClip& clip, const SegmentPlan& plan);
double seam_score(const LatentClip& lat, const SegmentPlan& plan);

// Row t of the result is column `column` of frame t (an F x H image).
Frame yt_slice(const VideoClip& clip, int column);

}  // namespace vip
