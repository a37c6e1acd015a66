#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "vip/diffusion.hpp"
#include "vip/latent.hpp"

namespace vip {

struct FusionConfig {
  int window_len = 24;
  int stride = 12;
  int offset = 6;                      // stream B phase shift
  std::set<int> fusion_steps = {1, 7};  // 1-based ordinals along the inference trajectory
  double noise_corr = 0.9;
  enum class Mode { Contiguous, Strided } mode = Mode::Contiguous;
  int strided_n = 0;  // coset modulus when mode == Strided

  void validate(int inference_steps) const;
};

struct SegmentWindow {
  std::vector<int> frames;   // global frame indices, ascending
  int stream = 0;            // 0 = A, 1 = B
  std::vector<double> ramp;  // raw (unnormalized) per-frame blend weight
};

struct SegmentPlan {
  int total_frames = 0;
  std::vector<SegmentWindow> windows;  // sorted by first frame, then stream
  // per frame: (window index, normalized weight); weights sum to 1 per frame
  std::vector<std::vector<std::pair<int, double>>> cover;

  // Frame indices at which some window begins or ends (in [1, F-1]); these are
  // the candidate seam locations used by the seam metric.
  std::vector<int> boundary_indices() const;
};

// Two offset streams of ramp-weighted windows. Stream A starts at multiples of
// the stride with the last window right-aligned to end at F; stream B holds the
// full-length windows of stream A shifted by `offset` (windows that would be
// truncated by the clip end are dropped). Strided mode instead emits the n
// cosets {f : f = r mod n}, each covering its frames with weight 1.
SegmentPlan plan_segments(int total_frames, const FusionConfig& cfg);

// AR(1) noise over frames: eps_0 ~ N(0,1), eps_f = rho*eps_{f-1} +
// sqrt(1-rho^2)*xi_f. Marginals are unit variance and adjacent frames
// correlate at exactly rho in expectation.
LatentClip init_correlated_noise(int frames, int channels, int height, int width, double rho,
                                 uint64_t seed);

// Weighted per-frame combination of the window latents; frames covered by a
// single window pass through unchanged.
LatentClip blend_windows(const std::vector<LatentClip>& window_latents, const SegmentPlan& plan);

// Denoises every window along the shared trajectory; after the DDIM update of
// each ordinal in fusion_steps the overlapping latents are blended and
// re-scattered into every covering window. The returned z_0 is the final
// blended readout.
LatentClip run_dual_fusion(const LatentClip& z_T, const KnownMap& known,
                           const LatentClip& z_masked, const Denoiser& denoiser,
                           const Schedule& sched, const FusionConfig& cfg,
                           const SampleOptions& opt, int threads = 1);

// Fusion passes performed: |fusion_steps| for this method, every inference
// step for the progressive-fusion baseline.
int count_fusion_ops(const FusionConfig& cfg, int inference_steps, bool baseline);

}  // namespace vip
