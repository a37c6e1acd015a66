#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "vip/latent.hpp"
#include "vip/video.hpp"

namespace vip {

// Noise schedule over training steps 1..T plus the boundary alpha_bar[0] = 1.
// Inference runs a strictly decreasing subsequence of training steps.
struct Schedule {
  int train_steps = 0;
  std::vector<double> alpha_bar;       // size T+1, alpha_bar[0] = 1
  std::vector<int> inference_indices;  // descending, last entry is the largest step

  double abar(int t) const { return alpha_bar[t]; }
  int inference_steps() const { return static_cast<int>(inference_indices.size()); }
};

// Scaled-linear beta schedule (8.5e-4 -> 1.2e-2, linear in sqrt(beta)) with
// uniformly spaced inference indices; the k-th index is round(k*T/S).
Schedule make_schedule(int train_steps, int inference_steps);

// v-prediction algebra. All ops are elementwise over same-shaped tensors.
LatentClip v_from(const LatentClip& x0, const LatentClip& eps, double abar);
std::pair<LatentClip, LatentClip> x0_eps_from_v(const LatentClip& z_t, const LatentClip& v,
                                                double abar);
LatentClip ddim_step(const LatentClip& z_t, const LatentClip& v_hat, double abar_t,
                     double abar_prev);

// One window's view of the conditioning triple plus scheduling/window context.
// `frames` holds the window's global frame indices; `window_ordinal` is the
// window's position in the plan (single-window sampling passes 0).
struct DenoiseInputs {
  const LatentClip& z_t;
  const KnownMap& known;        // latent-scale soft known map for these frames
  const LatentClip& z_masked;   // encoded masked clip for these frames
  int t = 0;                    // training-step index
  double abar = 1.0;
  const std::vector<int>* frames = nullptr;
  int window_ordinal = 0;
};

class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual LatentClip predict_v(const DenoiseInputs& in) const = 0;
};

// Exact v for a fixed target latent; drives DDIM to the target from any z_T.
std::unique_ptr<Denoiser> make_oracle_denoiser(LatentClip target);

// Imperfect-model stand-in: x0 = known*z_masked + (1-known)*prior, constant
// across steps.
std::unique_ptr<Denoiser> make_prior_denoiser(LatentClip prior);

// Prior denoiser plus a window-parity offset in the hole, with a trajectory
// feedback term proportional to the amplitude so that inter-window
// disagreement persists across steps (see header comment in diffusion.cpp).
std::unique_ptr<Denoiser> make_seam_probe_denoiser(LatentClip prior, double amplitude);

struct SampleOptions {
  bool known_reinjection = true;
};

// DDIM sampling loop over the schedule's inference indices (high -> low).
// With known_reinjection, cells whose known value is >= 0.5 are replaced after
// every step by the forward-noised z_masked at that step's noise level, using
// z_T as the fixed noise instance.
LatentClip sample(const LatentClip& z_T, const KnownMap& known, const LatentClip& z_masked,
                  const Denoiser& denoiser, const Schedule& sched, const SampleOptions& opt);

struct LossWeights {
  double w1 = 1.0;   // non-mask (known) weight
  double w2 = 2.0;   // mask (hole) weight
  double alpha = 3.0;  // pixel-loss weight in the total objective
};

// Region-normalized weighted L1 in latent space. The known map broadcasts
// over latent channels; each region's mean divides by its own total weight,
// and a region with zero weight contributes 0.
double latent_loss(const LatentClip& v_hat, const LatentClip& v_true, const KnownMap& known,
                   const LossWeights& weights);

// Mean absolute error between the clip and the decoded latent.
double pixel_loss(const VideoClip& x, const LatentClip& z0);

double total_loss(double lr, double lpix, const LossWeights& weights);

}  // namespace vip
