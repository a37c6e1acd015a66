#include "vip/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "vip/error.hpp"

namespace vip {
namespace {

constexpr double kBetaStart = 8.5e-4;
constexpr double kBetaEnd = 1.2e-2;
constexpr double kAbarOneEps = 1e-12;  // below this 1-abar is treated as 0

void check_same(const LatentClip& a, const LatentClip& b, const char* what) {
  if (!a.same_shape(b)) fail(ErrorCode::DimensionMismatch, what);
}

// Shared elementwise walk over the known map broadcast across channels.
template <typename Fn>
void for_each_known(const LatentClip& lat, const KnownMap& known, Fn&& fn) {
  if (known.frames != lat.frames || known.height != lat.height || known.width != lat.width)
    fail(ErrorCode::DimensionMismatch, "known map does not match latent shape");
  for (int f = 0; f < lat.frames; ++f)
    for (int c = 0; c < lat.channels; ++c)
      for (int y = 0; y < lat.height; ++y)
        for (int x = 0; x < lat.width; ++x)
          fn(f, c, y, x, known.at(f, y, x));
}

class OracleDenoiser final : public Denoiser {
 public:
  explicit OracleDenoiser(LatentClip target) : target_(std::move(target)) {}

  LatentClip predict_v(const DenoiseInputs& in) const override {
    const LatentClip target = slice_target(in);
    if (!target.same_shape(in.z_t))
      fail(ErrorCode::ContractViolation, "oracle target shape does not match z_t");
    const double abar = in.abar;
    const double sa = std::sqrt(abar);
    const double one_m = 1.0 - abar;
    LatentClip v = in.z_t;
    if (one_m < kAbarOneEps) {
      // abar = 1 boundary: eps* is 0/0, defined as 0
      for (size_t i = 0; i < v.data.size(); ++i) v.data[i] = 0.0;
      return v;
    }
    const double som = std::sqrt(one_m);
    for (size_t i = 0; i < v.data.size(); ++i) {
      const double eps = (in.z_t.data[i] - sa * target.data[i]) / som;
      v.data[i] = sa * eps - som * target.data[i];
    }
    return v;
  }

 private:
  LatentClip slice_target(const DenoiseInputs& in) const {
    if (in.frames) return gather_frames(target_, *in.frames);
    return target_;
  }
  LatentClip target_;
};

// x0 = known*z_masked + (1-known)*prior, independent of z_t.
LatentClip prior_x0(const DenoiseInputs& in, const LatentClip& prior_full) {
  LatentClip prior = in.frames ? gather_frames(prior_full, *in.frames) : prior_full;
  if (!prior.same_shape(in.z_t))
    fail(ErrorCode::ContractViolation, "prior shape does not match z_t");
  if (!in.z_masked.same_shape(in.z_t))
    fail(ErrorCode::ContractViolation, "z_masked shape does not match z_t");
  LatentClip x0 = in.z_t;
  for_each_known(x0, in.known, [&](int f, int c, int y, int x, double m) {
    const size_t i = ((static_cast<size_t>(f) * x0.channels + c) * x0.height + y) * x0.width + x;
    x0.data[i] = m * in.z_masked.data[i] + (1.0 - m) * prior.data[i];
  });
  return x0;
}

LatentClip v_of_x0(const LatentClip& z_t, const LatentClip& x0, double abar) {
  const double sa = std::sqrt(abar);
  const double one_m = 1.0 - abar;
  LatentClip v = z_t;
  if (one_m < kAbarOneEps) {
    // abar = 1: eps_hat is defined as 0 and the sqrt(1-abar) term vanishes
    std::fill(v.data.begin(), v.data.end(), 0.0);
    return v;
  }
  const double som = std::sqrt(one_m);
  for (size_t i = 0; i < v.data.size(); ++i) {
    const double eps = (z_t.data[i] - sa * x0.data[i]) / som;
    v.data[i] = sa * eps - som * x0.data[i];
  }
  return v;
}

class PriorDenoiser final : public Denoiser {
 public:
  explicit PriorDenoiser(LatentClip prior) : prior_(std::move(prior)) {}

  LatentClip predict_v(const DenoiseInputs& in) const override {
    return v_of_x0(in.z_t, prior_x0(in, prior_), in.abar);
  }

 private:
  LatentClip prior_;
};

// The plain prior denoiser predicts the same x0 at every step, so the final
// DDIM update (alpha_bar_prev = 1) jumps to x0 and erases whatever the fused
// trajectory carried. To let window fusion influence the outcome the probe
// mixes a trajectory term sqrt(abar)*z_t into its prediction, with mixing
// strength eta tied to the offset amplitude so that amplitude 0 degenerates to
// the prior denoiser exactly.
class SeamProbeDenoiser final : public Denoiser {
 public:
  SeamProbeDenoiser(LatentClip prior, double amplitude)
      : prior_(std::move(prior)), amplitude_(amplitude) {}

  LatentClip predict_v(const DenoiseInputs& in) const override {
    LatentClip x0 = prior_x0(in, prior_);
    const double sign = (in.window_ordinal % 2 == 0) ? 1.0 : -1.0;
    const double eta = std::min(1.0, std::fabs(amplitude_));
    const double sa = std::sqrt(in.abar);
    for_each_known(x0, in.known, [&](int f, int c, int y, int x, double m) {
      const size_t i = ((static_cast<size_t>(f) * x0.channels + c) * x0.height + y) * x0.width + x;
      if (m < 0.5) {
        const double offset = amplitude_ * sign;
        x0.data[i] = (1.0 - eta) * (x0.data[i] + offset) + eta * sa * in.z_t.data[i];
      }
    });
    return v_of_x0(in.z_t, x0, in.abar);
  }

 private:
  LatentClip prior_;
  double amplitude_;
};

}  // namespace

Schedule make_schedule(int train_steps, int inference_steps) {
  if (train_steps < 1) fail(ErrorCode::InvalidArgument, "train_steps must be >= 1");
  if (inference_steps < 1 || inference_steps > train_steps)
    fail(ErrorCode::InvalidArgument, "need 1 <= inference_steps <= train_steps");

  Schedule s;
  s.train_steps = train_steps;
  s.alpha_bar.resize(train_steps + 1);
  s.alpha_bar[0] = 1.0;
  const double sb0 = std::sqrt(kBetaStart);
  const double sb1 = std::sqrt(kBetaEnd);
  double prod = 1.0;
  for (int t = 1; t <= train_steps; ++t) {
    const double frac = train_steps == 1 ? 0.0 : static_cast<double>(t - 1) / (train_steps - 1);
    const double sq = sb0 + frac * (sb1 - sb0);
    prod *= 1.0 - sq * sq;
    s.alpha_bar[t] = prod;
  }

  s.inference_indices.resize(inference_steps);
  for (int k = 1; k <= inference_steps; ++k) {
    const double pos = static_cast<double>(k) * train_steps / inference_steps;
    s.inference_indices[inference_steps - k] = static_cast<int>(std::llround(pos));
  }
  return s;
}

LatentClip v_from(const LatentClip& x0, const LatentClip& eps, double abar) {
  check_same(x0, eps, "x0 and eps shapes disagree");
  const double sa = std::sqrt(abar);
  const double som = std::sqrt(std::max(0.0, 1.0 - abar));
  LatentClip v = x0;
  for (size_t i = 0; i < v.data.size(); ++i)
    v.data[i] = sa * eps.data[i] - som * x0.data[i];
  return v;
}

std::pair<LatentClip, LatentClip> x0_eps_from_v(const LatentClip& z_t, const LatentClip& v,
                                                double abar) {
  check_same(z_t, v, "z_t and v shapes disagree");
  const double sa = std::sqrt(abar);
  const double som = std::sqrt(std::max(0.0, 1.0 - abar));
  LatentClip x0 = z_t;
  LatentClip eps = z_t;
  for (size_t i = 0; i < z_t.data.size(); ++i) {
    x0.data[i] = sa * z_t.data[i] - som * v.data[i];
    eps.data[i] = som * z_t.data[i] + sa * v.data[i];
  }
  return {std::move(x0), std::move(eps)};
}

LatentClip ddim_step(const LatentClip& z_t, const LatentClip& v_hat, double abar_t,
                     double abar_prev) {
  auto [x0, eps] = x0_eps_from_v(z_t, v_hat, abar_t);
  const double sa = std::sqrt(abar_prev);
  const double som = std::sqrt(std::max(0.0, 1.0 - abar_prev));
  LatentClip z = z_t;
  for (size_t i = 0; i < z.data.size(); ++i)
    z.data[i] = sa * x0.data[i] + som * eps.data[i];
  return z;
}

std::unique_ptr<Denoiser> make_oracle_denoiser(LatentClip target) {
  return std::make_unique<OracleDenoiser>(std::move(target));
}
std::unique_ptr<Denoiser> make_prior_denoiser(LatentClip prior) {
  return std::make_unique<PriorDenoiser>(std::move(prior));
}
std::unique_ptr<Denoiser> make_seam_probe_denoiser(LatentClip prior, double amplitude) {
  return std::make_unique<SeamProbeDenoiser>(std::move(prior), amplitude);
}

LatentClip sample(const LatentClip& z_T, const KnownMap& known, const LatentClip& z_masked,
                  const Denoiser& denoiser, const Schedule& sched, const SampleOptions& opt) {
  check_same(z_T, z_masked, "z_T and z_masked shapes disagree");
  LatentClip z = z_T;
  const int S = sched.inference_steps();
  for (int k = 0; k < S; ++k) {
    const int t = sched.inference_indices[k];
    const int t_prev = (k + 1 < S) ? sched.inference_indices[k + 1] : 0;
    DenoiseInputs in{z, known, z_masked, t, sched.abar(t), nullptr, 0};
    LatentClip v_hat = denoiser.predict_v(in);
    if (!v_hat.same_shape(z))
      fail(ErrorCode::ContractViolation, "denoiser returned wrong shape");
    z = ddim_step(z, v_hat, sched.abar(t), sched.abar(t_prev));
    if (opt.known_reinjection) {
      const double sa = std::sqrt(sched.abar(t_prev));
      const double som = std::sqrt(std::max(0.0, 1.0 - sched.abar(t_prev)));
      for_each_known(z, known, [&](int f, int c, int y, int x, double m) {
        if (m >= 0.5) {
          const size_t i =
              ((static_cast<size_t>(f) * z.channels + c) * z.height + y) * z.width + x;
          z.data[i] = sa * z_masked.data[i] + som * z_T.data[i];
        }
      });
    }
  }
  return z;
}

double latent_loss(const LatentClip& v_hat, const LatentClip& v_true, const KnownMap& known,
                   const LossWeights& weights) {
  check_same(v_hat, v_true, "v_hat and v_true shapes disagree");
  double known_sum = 0.0, known_weight = 0.0;
  double hole_sum = 0.0, hole_weight = 0.0;
  for_each_known(v_hat, known, [&](int f, int c, int y, int x, double m) {
    const size_t i =
        ((static_cast<size_t>(f) * v_hat.channels + c) * v_hat.height + y) * v_hat.width + x;
    const double d = std::fabs(v_hat.data[i] - v_true.data[i]);
    known_sum += d * m;
    known_weight += m;
    hole_sum += d * (1.0 - m);
    hole_weight += 1.0 - m;
  });
  double loss = 0.0;
  if (known_weight > 0.0) loss += weights.w1 * known_sum / known_weight;
  if (hole_weight > 0.0) loss += weights.w2 * hole_sum / hole_weight;
  return loss;
}

double pixel_loss(const VideoClip& x, const LatentClip& z0) {
  const VideoClip decoded = decode(z0);
  if (decoded.frame_count() != x.frame_count() || decoded.height() != x.height() ||
      decoded.width() != x.width() || decoded.channels() != x.channels())
    fail(ErrorCode::DimensionMismatch, "decoded latent shape does not match clip");
  double sum = 0.0;
  size_t n = 0;
  for (int f = 0; f < x.frame_count(); ++f) {
    const auto& a = x.frames[f].data;
    const auto& b = decoded.frames[f].data;
    for (size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
    n += a.size();
  }
  return sum / static_cast<double>(n);
}

double total_loss(double lr, double lpix, const LossWeights& weights) {
  return lr + weights.alpha * lpix;
}

}  // namespace vip
