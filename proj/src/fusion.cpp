#include "vip/fusion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "vip/error.hpp"
#include "vip/rng.hpp"

namespace vip {
namespace {

std::vector<double> ramp_weights(int len, int window_len) {
  std::vector<double> w(len, 1.0);
  if (len <= 1) return w;
  const double floor_w = 1.0 / window_len;
  const double center = (len - 1) / 2.0;
  for (int i = 0; i < len; ++i)
    w[i] = 1.0 - (1.0 - floor_w) * std::fabs(i - center) / center;
  return w;
}

SegmentWindow contiguous_window(int begin, int end, int stream, int window_len) {
  SegmentWindow win;
  win.stream = stream;
  win.frames.resize(end - begin);
  for (int f = begin; f < end; ++f) win.frames[f - begin] = f;
  win.ramp = ramp_weights(end - begin, window_len);
  return win;
}

void run_windows_parallel(int count, int threads, const std::function<void(int)>& fn);

}  // namespace

void FusionConfig::validate(int inference_steps) const {
  if (window_len < 1) fail(ErrorCode::InvalidArgument, "window_len must be >= 1");
  if (stride < 1 || stride > window_len)
    fail(ErrorCode::InvalidArgument, "need 1 <= stride <= window_len");
  if (offset < 0 || offset >= stride)
    fail(ErrorCode::InvalidArgument, "need 0 <= offset < stride");
  if (noise_corr < 0.0 || noise_corr > 1.0)
    fail(ErrorCode::InvalidArgument, "noise_corr must be in [0,1]");
  if (mode == Mode::Strided && strided_n < 1)
    fail(ErrorCode::InvalidArgument, "strided mode needs n >= 1");
  for (int s : fusion_steps)
    if (s < 1 || s > inference_steps)
      fail(ErrorCode::InvalidArgument, "fusion step ordinal outside [1, inference_steps]");
}

std::vector<int> SegmentPlan::boundary_indices() const {
  std::vector<int> b;
  for (const SegmentWindow& w : windows) {
    if (w.frames.empty()) continue;
    const int begin = w.frames.front();
    const int end = w.frames.back() + 1;
    if (begin >= 1 && begin <= total_frames - 1) b.push_back(begin);
    if (end >= 1 && end <= total_frames - 1) b.push_back(end);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

SegmentPlan plan_segments(int total_frames, const FusionConfig& cfg) {
  if (total_frames < 1) fail(ErrorCode::InvalidArgument, "total_frames must be >= 1");
  SegmentPlan plan;
  plan.total_frames = total_frames;

  if (cfg.mode == FusionConfig::Mode::Strided) {
    const int n = std::min(cfg.strided_n, total_frames);
    for (int r = 0; r < n; ++r) {
      SegmentWindow win;
      win.stream = 0;
      for (int f = r; f < total_frames; f += n) win.frames.push_back(f);
      win.ramp.assign(win.frames.size(), 1.0);
      plan.windows.push_back(std::move(win));
    }
  } else {
    const int wl = std::min(cfg.window_len, total_frames);
    // stream A: stride-spaced starts, last window right-aligned to end at F
    std::vector<int> starts;
    for (int s = 0;; s += cfg.stride) {
      if (s + wl >= total_frames) {
        starts.push_back(total_frames - wl);
        break;
      }
      starts.push_back(s);
    }
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    for (int s : starts) plan.windows.push_back(contiguous_window(s, s + wl, 0, cfg.window_len));
    // stream B: offset copies, full-length windows only
    if (cfg.offset > 0) {
      for (int s = cfg.offset; s + wl <= total_frames; s += cfg.stride)
        plan.windows.push_back(contiguous_window(s, s + wl, 1, cfg.window_len));
    }
    std::sort(plan.windows.begin(), plan.windows.end(),
              [](const SegmentWindow& a, const SegmentWindow& b) {
                if (a.frames.front() != b.frames.front()) return a.frames.front() < b.frames.front();
                return a.stream < b.stream;
              });
  }

  // normalize blend weights per frame
  plan.cover.assign(total_frames, {});
  std::vector<double> totals(total_frames, 0.0);
  for (int w = 0; w < static_cast<int>(plan.windows.size()); ++w) {
    const SegmentWindow& win = plan.windows[w];
    for (size_t i = 0; i < win.frames.size(); ++i) totals[win.frames[i]] += win.ramp[i];
  }
  for (int w = 0; w < static_cast<int>(plan.windows.size()); ++w) {
    const SegmentWindow& win = plan.windows[w];
    for (size_t i = 0; i < win.frames.size(); ++i) {
      const int f = win.frames[i];
      plan.cover[f].push_back({w, win.ramp[i] / totals[f]});
    }
  }
  for (int f = 0; f < total_frames; ++f)
    if (plan.cover[f].empty()) fail(ErrorCode::PlanViolation, "frame not covered by any window");
  return plan;
}

LatentClip init_correlated_noise(int frames, int channels, int height, int width, double rho,
                                 uint64_t seed) {
  if (rho < 0.0 || rho > 1.0) fail(ErrorCode::InvalidArgument, "rho must be in [0,1]");
  LatentClip noise = LatentClip::zeros(frames, channels, height, width);
  Rng rng(seed);
  const size_t n = noise.per_frame();
  const double blend = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (int f = 0; f < frames; ++f) {
    double* cur = noise.data.data() + static_cast<size_t>(f) * n;
    if (f == 0) {
      for (size_t i = 0; i < n; ++i) cur[i] = rng.normal();
    } else {
      const double* prev = noise.data.data() + static_cast<size_t>(f - 1) * n;
      for (size_t i = 0; i < n; ++i) cur[i] = rho * prev[i] + blend * rng.normal();
    }
  }
  return noise;
}

LatentClip blend_windows(const std::vector<LatentClip>& window_latents, const SegmentPlan& plan) {
  if (window_latents.size() != plan.windows.size())
    fail(ErrorCode::PlanViolation, "window latent count does not match plan");
  if (window_latents.empty()) fail(ErrorCode::PlanViolation, "empty plan");
  const LatentClip& first = window_latents[0];
  LatentClip out = LatentClip::zeros(plan.total_frames, first.channels, first.height, first.width);
  out.pixel_height = first.pixel_height;
  out.pixel_width = first.pixel_width;
  out.pixel_channels = first.pixel_channels;
  out.fps = first.fps;
  const size_t n = out.per_frame();
  for (int f = 0; f < plan.total_frames; ++f) {
    double* dst = out.data.data() + static_cast<size_t>(f) * n;
    for (const auto& [w, weight] : plan.cover[f]) {
      const SegmentWindow& win = plan.windows[w];
      const auto it = std::lower_bound(win.frames.begin(), win.frames.end(), f);
      const size_t local = static_cast<size_t>(it - win.frames.begin());
      const LatentClip& lat = window_latents[w];
      if (static_cast<int>(win.frames.size()) != lat.frames)
        fail(ErrorCode::PlanViolation, "window latent frame count mismatch");
      const double* src = lat.data.data() + local * n;
      for (size_t i = 0; i < n; ++i) dst[i] += weight * src[i];
    }
  }
  return out;
}

namespace {

void run_windows_parallel(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  const int workers = std::min(threads, count);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

LatentClip run_dual_fusion(const LatentClip& z_T, const KnownMap& known,
                           const LatentClip& z_masked, const Denoiser& denoiser,
                           const Schedule& sched, const FusionConfig& cfg,
                           const SampleOptions& opt, int threads) {
  cfg.validate(sched.inference_steps());
  const SegmentPlan plan = plan_segments(z_T.frames, cfg);
  const int W = static_cast<int>(plan.windows.size());

  // per-window slices of the conditioning triple
  std::vector<LatentClip> z(W), zm(W), noise(W);
  std::vector<KnownMap> km(W);
  for (int w = 0; w < W; ++w) {
    const auto& frames = plan.windows[w].frames;
    z[w] = gather_frames(z_T, frames);
    noise[w] = z[w];
    zm[w] = gather_frames(z_masked, frames);
    KnownMap k;
    k.frames = static_cast<int>(frames.size());
    k.height = known.height;
    k.width = known.width;
    k.data.resize(static_cast<size_t>(k.frames) * k.height * k.width);
    const size_t per = static_cast<size_t>(known.height) * known.width;
    for (size_t i = 0; i < frames.size(); ++i)
      std::copy_n(known.data.begin() + frames[i] * per, per, k.data.begin() + i * per);
    km[w] = std::move(k);
  }

  const int S = sched.inference_steps();
  for (int k = 0; k < S; ++k) {
    const int t = sched.inference_indices[k];
    const int t_prev = (k + 1 < S) ? sched.inference_indices[k + 1] : 0;
    const double abar_t = sched.abar(t);
    const double abar_prev = sched.abar(t_prev);

    run_windows_parallel(W, threads, [&](int w) {
      DenoiseInputs in{z[w], km[w], zm[w], t, abar_t, &plan.windows[w].frames, w};
      LatentClip v_hat = denoiser.predict_v(in);
      if (!v_hat.same_shape(z[w]))
        fail(ErrorCode::ContractViolation, "denoiser returned wrong shape");
      z[w] = ddim_step(z[w], v_hat, abar_t, abar_prev);
      if (opt.known_reinjection) {
        const double sa = std::sqrt(abar_prev);
        const double som = std::sqrt(std::max(0.0, 1.0 - abar_prev));
        LatentClip& zw = z[w];
        const KnownMap& kw = km[w];
        for (int f = 0; f < zw.frames; ++f)
          for (int c = 0; c < zw.channels; ++c)
            for (int y = 0; y < zw.height; ++y)
              for (int x = 0; x < zw.width; ++x)
                if (kw.at(f, y, x) >= 0.5) {
                  const size_t i =
                      ((static_cast<size_t>(f) * zw.channels + c) * zw.height + y) * zw.width + x;
                  zw.data[i] = sa * zm[w].data[i] + som * noise[w].data[i];
                }
      }
    });

    if (cfg.fusion_steps.count(k + 1)) {
      const LatentClip fused = blend_windows(z, plan);
      for (int w = 0; w < W; ++w) z[w] = gather_frames(fused, plan.windows[w].frames);
    }
  }

  // Readout: each frame comes from the latest-starting window that covers it.
  // Fusion steps are the only place latents mix; when windows still disagree
  // at the end, the handover at each window-start frame stays visible, which
  // is exactly what the seam metric measures at the plan boundaries.
  LatentClip out = LatentClip::zeros(plan.total_frames, z_T.channels, z_T.height, z_T.width);
  out.pixel_height = z_T.pixel_height;
  out.pixel_width = z_T.pixel_width;
  out.pixel_channels = z_T.pixel_channels;
  out.fps = z_T.fps;
  const size_t per = out.per_frame();
  for (int f = 0; f < plan.total_frames; ++f) {
    int best_w = -1;
    int best_start = -1;
    for (const auto& [w, weight] : plan.cover[f]) {
      (void)weight;
      const int start = plan.windows[w].frames.front();
      if (start > best_start) {
        best_start = start;
        best_w = w;
      }
    }
    const SegmentWindow& win = plan.windows[best_w];
    const auto it = std::lower_bound(win.frames.begin(), win.frames.end(), f);
    const size_t local = static_cast<size_t>(it - win.frames.begin());
    std::copy_n(z[best_w].data.begin() + local * per, per,
                out.data.begin() + static_cast<size_t>(f) * per);
  }
  return out;
}

int count_fusion_ops(const FusionConfig& cfg, int inference_steps, bool baseline) {
  return baseline ? inference_steps : static_cast<int>(cfg.fusion_steps.size());
}

}  // namespace vip
