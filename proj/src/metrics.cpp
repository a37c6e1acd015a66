#include "vip/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "vip/error.hpp"

namespace vip {
namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

double mse(const VideoClip& a, const VideoClip& b) {
  double sum = 0.0;
  size_t n = 0;
  for (int f = 0; f < a.frame_count(); ++f) {
    const auto& da = a.frames[f].data;
    const auto& db = b.frames[f].data;
    for (size_t i = 0; i < da.size(); ++i) {
      const double d = da[i] - db[i];
      sum += d * d;
    }
    n += da.size();
  }
  return sum / static_cast<double>(n);
}

double psnr_of_mse(double m) {
  if (m <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

void check_clip_shapes(const VideoClip& a, const VideoClip& b) {
  if (a.frame_count() != b.frame_count() || a.height() != b.height() ||
      a.width() != b.width() || a.channels() != b.channels())
    fail(ErrorCode::DimensionMismatch, "clip shapes disagree");
}

std::vector<double> ssim_kernel() {
  std::vector<double> k(kSsimWindow);
  const double c = (kSsimWindow - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    k[i] = std::exp(-(i - c) * (i - c) / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

double ssim_frame(const Frame& a, const Frame& b) {
  static const std::vector<double> kernel = ssim_kernel();
  const int H = a.height, W = a.width, C = a.channels;
  double total = 0.0;
  size_t count = 0;
  for (int c = 0; c < C; ++c)
    for (int y = 0; y + kSsimWindow <= H; ++y)
      for (int x = 0; x + kSsimWindow <= W; ++x) {
        double mu1 = 0, mu2 = 0, e11 = 0, e22 = 0, e12 = 0;
        for (int wy = 0; wy < kSsimWindow; ++wy)
          for (int wx = 0; wx < kSsimWindow; ++wx) {
            const double w = kernel[wy] * kernel[wx];
            const double p = a.at(y + wy, x + wx, c);
            const double q = b.at(y + wy, x + wx, c);
            mu1 += w * p;
            mu2 += w * q;
            e11 += w * p * p;
            e22 += w * q * q;
            e12 += w * p * q;
          }
        const double var1 = e11 - mu1 * mu1;
        const double var2 = e22 - mu2 * mu2;
        const double cov = e12 - mu1 * mu2;
        const double num = (2 * mu1 * mu2 + kSsimC1) * (2 * cov + kSsimC2);
        const double den = (mu1 * mu1 + mu2 * mu2 + kSsimC1) * (var1 + var2 + kSsimC2);
        total += num / den;
        ++count;
      }
  return total / static_cast<double>(count);
}

// Mean absolute difference between consecutive entries of a per-frame series.
template <typename GetFrameDiff>
double seam_from_diffs(int frames, const SegmentPlan& plan, GetFrameDiff&& diff) {
  const std::vector<int> bounds = plan.boundary_indices();
  if (frames < 2 || bounds.empty()) return 0.0;
  std::vector<bool> is_boundary(frames, false);
  for (int b : bounds) is_boundary[b] = true;
  double bsum = 0.0, isum = 0.0;
  int bn = 0, in = 0;
  for (int f = 1; f < frames; ++f) {
    const double d = diff(f);
    if (is_boundary[f]) {
      bsum += d;
      ++bn;
    } else {
      isum += d;
      ++in;
    }
  }
  if (bn == 0) return 0.0;
  const double b_mean = bsum / bn;
  const double i_mean = in > 0 ? isum / in : 0.0;
  return std::max(0.0, b_mean - i_mean);
}

}  // namespace

double psnr(const VideoClip& a, const VideoClip& b) {
  check_clip_shapes(a, b);
  return psnr_of_mse(mse(a, b));
}

double psnr_frame(const Frame& a, const Frame& b) {
  if (!a.same_shape(b)) fail(ErrorCode::DimensionMismatch, "frame shapes disagree");
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  return psnr_of_mse(sum / static_cast<double>(a.data.size()));
}

double ssim(const VideoClip& a, const VideoClip& b) {
  check_clip_shapes(a, b);
  if (a.height() < kSsimWindow || a.width() < kSsimWindow)
    fail(ErrorCode::InvalidArgument, "frames smaller than the SSIM window");
  double total = 0.0;
  for (int f = 0; f < a.frame_count(); ++f) total += ssim_frame(a.frames[f], b.frames[f]);
  return total / a.frame_count();
}

WarpErrorResult warping_error(const VideoClip& clip, const FlowPairs& flows) {
  const int F = clip.frame_count();
  if (static_cast<int>(flows.backward.size()) != F - 1)
    fail(ErrorCode::DimensionMismatch, "flows must cover all adjacent pairs");
  WarpErrorResult res;
  if (F < 2) return res;
  double total = 0.0;
  for (int t = 0; t + 1 < F; ++t) {
    auto [warped, coverage] = warp(clip.frames[t], flows.backward[t]);
    double sum = 0.0;
    size_t n = 0;
    const Frame& target = clip.frames[t + 1];
    for (int y = 0; y < target.height; ++y)
      for (int x = 0; x < target.width; ++x) {
        if (!coverage.at(y, x)) continue;
        for (int c = 0; c < target.channels; ++c) {
          const double d = target.at(y, x, c) - warped.at(y, x, c);
          sum += d * d;
          ++n;
        }
      }
    if (n == 0) {
      ++res.zero_coverage_pairs;  // contributes 0
      continue;
    }
    total += sum / static_cast<double>(n);
  }
  res.value = total / (F - 1);
  return res;
}

double temporal_flicker(const VideoClip& clip, const MaskSeq* static_mask) {
  const int F = clip.frame_count();
  if (F < 2) fail(ErrorCode::InvalidArgument, "temporal flicker needs at least 2 frames");
  if (static_mask) check_same_shape(clip, *static_mask);
  double total = 0.0;
  size_t n = 0;
  for (int t = 0; t + 1 < F; ++t) {
    const Frame& a = clip.frames[t];
    const Frame& b = clip.frames[t + 1];
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x) {
        if (static_mask &&
            !(static_mask->masks[t].at(y, x) && static_mask->masks[t + 1].at(y, x)))
          continue;
        for (int c = 0; c < a.channels; ++c) {
          total += std::fabs(a.at(y, x, c) - b.at(y, x, c));
          ++n;
        }
      }
  }
  const double mae = n > 0 ? total / static_cast<double>(n) : 0.0;
  return 100.0 * (1.0 - mae);
}

double seam_score(const VideoClip& clip, const SegmentPlan& plan) {
  return seam_from_diffs(clip.frame_count(), plan, [&](int f) {
    const auto& a = clip.frames[f - 1].data;
    const auto& b = clip.frames[f].data;
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
  });
}

double seam_score(const LatentClip& lat, const SegmentPlan& plan) {
  const size_t n = lat.per_frame();
  return seam_from_diffs(lat.frames, plan, [&](int f) {
    const double* a = lat.data.data() + static_cast<size_t>(f - 1) * n;
    const double* b = lat.data.data() + static_cast<size_t>(f) * n;
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s / static_cast<double>(n);
  });
}

Frame yt_slice(const VideoClip& clip, int column) {
  clip.validate();
  if (column < 0 || column >= clip.width())
    fail(ErrorCode::InvalidArgument, "column out of range");
  const int F = clip.frame_count(), H = clip.height(), C = clip.channels();
  Frame out = Frame::zeros(F, H, C);
  for (int t = 0; t < F; ++t)
    for (int y = 0; y < H; ++y)
      for (int c = 0; c < C; ++c) out.at(t, y, c) = clip.frames[t].at(y, column, c);
  return out;
}

std::string Report::to_json() const {
  nlohmann::ordered_json j;
  j["psnr"] = psnr;
  j["ssim"] = ssim;
  j["e_warp_x1e3"] = e_warp_x1e3;
  j["tf"] = tf;
  j["seam"] = seam;
  j["fusion_ops"] = fusion_ops;
  j["runtime_ms"] = runtime_ms;
  if (per_frame_psnr) j["per_frame"] = {{"psnr", *per_frame_psnr}};
  return j.dump(2) + "\n";
}

Report Report::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Report r;
  r.psnr = j.at("psnr").get<double>();
  r.ssim = j.at("ssim").get<double>();
  r.e_warp_x1e3 = j.at("e_warp_x1e3").get<double>();
  r.tf = j.at("tf").get<double>();
  r.seam = j.at("seam").get<double>();
  r.fusion_ops = j.at("fusion_ops").get<int>();
  r.runtime_ms = j.at("runtime_ms").get<double>();
  if (j.contains("per_frame") && j["per_frame"].contains("psnr"))
    r.per_frame_psnr = j["per_frame"]["psnr"].get<std::vector<double>>();
  return r;
}

}  // namespace vip
