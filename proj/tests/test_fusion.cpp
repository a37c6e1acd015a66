#include <cmath>
#include <set>

#include "doctest.h"
#include "vip/diffusion.hpp"
#include "vip/error.hpp"
#include "vip/fusion.hpp"
#include "vip/metrics.hpp"
#include "vip/rng.hpp"

using namespace vip;

namespace {

LatentClip random_latent(int f, int c, int h, int w, uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  LatentClip lat = LatentClip::zeros(f, c, h, w);
  for (double& v : lat.data) v = scale * rng.normal();
  return lat;
}

KnownMap uniform_known(int f, int h, int w, double value) {
  KnownMap km;
  km.frames = f;
  km.height = h;
  km.width = w;
  km.data.assign(static_cast<size_t>(f) * h * w, value);
  return km;
}

double max_abs_diff(const LatentClip& a, const LatentClip& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

std::vector<std::pair<int, int>> window_ranges(const SegmentPlan& plan, int stream) {
  std::vector<std::pair<int, int>> r;
  for (const SegmentWindow& w : plan.windows)
    if (w.stream == stream) r.push_back({w.frames.front(), w.frames.back() + 1});
  return r;
}

}  // namespace

TEST_CASE("plan_segments window layout") {
  FusionConfig cfg;  // 24 / 12 / 6

  SUBCASE("short clips give a single full-weight window") {
    const SegmentPlan plan = plan_segments(16, cfg);
    REQUIRE(plan.windows.size() == 1);
    CHECK(plan.windows[0].frames.front() == 0);
    CHECK(plan.windows[0].frames.back() == 15);
    for (int f = 0; f < 16; ++f) {
      REQUIRE(plan.cover[f].size() == 1);
      CHECK(plan.cover[f][0].second == doctest::Approx(1.0));
    }
  }
  SUBCASE("F=36") {
    const SegmentPlan plan = plan_segments(36, cfg);
    const auto a = window_ranges(plan, 0);
    const auto b = window_ranges(plan, 1);
    CHECK(a == std::vector<std::pair<int, int>>{{0, 24}, {12, 36}});
    CHECK(b == std::vector<std::pair<int, int>>{{6, 30}});
  }
  SUBCASE("F=48") {
    const SegmentPlan plan = plan_segments(48, cfg);
    const auto a = window_ranges(plan, 0);
    const auto b = window_ranges(plan, 1);
    CHECK(a == std::vector<std::pair<int, int>>{{0, 24}, {12, 36}, {24, 48}});
    CHECK(b == std::vector<std::pair<int, int>>{{6, 30}, {18, 42}});
  }
  SUBCASE("per-frame weights sum to 1 for every clip length") {
    for (int F = 1; F <= 200; ++F) {
      const SegmentPlan plan = plan_segments(F, cfg);
      for (int f = 0; f < F; ++f) {
        double sum = 0.0;
        for (const auto& [w, weight] : plan.cover[f]) sum += weight;
        REQUIRE(std::fabs(sum - 1.0) <= 1e-9);
      }
    }
  }
  SUBCASE("strided mode emits cosets") {
    FusionConfig sc = cfg;
    sc.mode = FusionConfig::Mode::Strided;
    sc.strided_n = 3;
    const SegmentPlan plan = plan_segments(10, sc);
    REQUIRE(plan.windows.size() == 3);
    CHECK(plan.windows[0].frames == std::vector<int>{0, 3, 6, 9});
    CHECK(plan.windows[1].frames == std::vector<int>{1, 4, 7});
    CHECK(plan.windows[2].frames == std::vector<int>{2, 5, 8});
    for (int f = 0; f < 10; ++f) REQUIRE(plan.cover[f].size() == 1);
  }
  SUBCASE("invalid frame count") {
    try {
      plan_segments(0, cfg);
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
    }
  }
}

TEST_CASE("correlated noise statistics") {
  const int F = 8, C = 4, H = 25, W = 25;  // 5000 values per frame pair

  SUBCASE("rho = 1 repeats the first frame") {
    const LatentClip n = init_correlated_noise(F, C, H, W, 1.0, 7);
    const size_t per = n.per_frame();
    for (int f = 1; f < F; ++f)
      for (size_t i = 0; i < per; ++i)
        CHECK(n.data[f * per + i] == n.data[i]);
  }
  SUBCASE("variance is about 1 and adjacent correlation about rho") {
    for (double rho : {0.0, 0.5, 0.9}) {
      const LatentClip n = init_correlated_noise(F, C, H, W, rho, 11);
      const size_t per = n.per_frame();
      double var = 0.0, corr = 0.0;
      size_t nv = 0, nc = 0;
      for (int f = 0; f < F; ++f)
        for (size_t i = 0; i < per; ++i) {
          var += n.data[f * per + i] * n.data[f * per + i];
          ++nv;
          if (f > 0) {
            corr += n.data[f * per + i] * n.data[(f - 1) * per + i];
            ++nc;
          }
        }
      CHECK(var / nv == doctest::Approx(1.0).epsilon(0.05));
      CHECK(std::fabs(corr / nc - rho) <= 0.05);
    }
  }
  SUBCASE("determinism") {
    const LatentClip a = init_correlated_noise(4, 4, 8, 8, 0.9, 3);
    const LatentClip b = init_correlated_noise(4, 4, 8, 8, 0.9, 3);
    CHECK(a.data == b.data);
  }
}

TEST_CASE("blend_windows") {
  FusionConfig cfg;

  SUBCASE("single-window plan is the identity") {
    const SegmentPlan plan = plan_segments(6, cfg);
    const LatentClip lat = random_latent(6, 4, 2, 2, 31);
    const LatentClip out = blend_windows({lat}, plan);
    CHECK(max_abs_diff(out, lat) == 0.0);
  }
  SUBCASE("blending a constant clip returns the constant") {
    const SegmentPlan plan = plan_segments(48, cfg);
    std::vector<LatentClip> wl;
    for (const SegmentWindow& w : plan.windows) {
      LatentClip lat = LatentClip::zeros(static_cast<int>(w.frames.size()), 4, 2, 2);
      for (double& v : lat.data) v = 0.625;
      wl.push_back(std::move(lat));
    }
    const LatentClip out = blend_windows(wl, plan);
    for (double v : out.data) CHECK(v == doctest::Approx(0.625).epsilon(1e-12));
  }
  SUBCASE("two covering windows mix by their weights") {
    FusionConfig small;
    small.window_len = 4;
    small.stride = 2;
    small.offset = 1;
    const SegmentPlan plan = plan_segments(6, small);
    std::vector<LatentClip> wl;
    for (size_t w = 0; w < plan.windows.size(); ++w) {
      LatentClip lat = LatentClip::zeros(static_cast<int>(plan.windows[w].frames.size()), 1, 1, 1);
      for (double& v : lat.data) v = static_cast<double>(w);
      wl.push_back(std::move(lat));
    }
    const LatentClip out = blend_windows(wl, plan);
    for (int f = 0; f < 6; ++f) {
      double expect = 0.0;
      for (const auto& [w, weight] : plan.cover[f]) expect += weight * w;
      CHECK(out.at(f, 0, 0, 0) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("run_dual_fusion") {
  const int F = 48, C = 4, H = 4, W = 4;
  const Schedule sched = make_schedule(1000, 8);
  FusionConfig cfg;
  const SampleOptions opt{true};

  SUBCASE("oracle stays exact across windows") {
    const LatentClip target = random_latent(F, C, H, W, 41, 0.5);
    const LatentClip z_T = init_correlated_noise(F, C, H, W, cfg.noise_corr, 42);
    const KnownMap km = uniform_known(F, H, W, 0.0);
    const auto oracle = make_oracle_denoiser(target);
    const LatentClip z0 = run_dual_fusion(z_T, km, LatentClip::zeros(F, C, H, W), *oracle,
                                          sched, cfg, opt, 1);
    CHECK(max_abs_diff(z0, target) <= 1e-5);
  }
  SUBCASE("no hole plus reinjection returns the encoded original") {
    const LatentClip z_masked = random_latent(F, C, H, W, 43, 0.5);
    const LatentClip z_T = init_correlated_noise(F, C, H, W, cfg.noise_corr, 44);
    const KnownMap km = uniform_known(F, H, W, 1.0);
    const auto den = make_prior_denoiser(LatentClip::zeros(F, C, H, W));
    const LatentClip z0 = run_dual_fusion(z_T, km, z_masked, *den, sched, cfg, opt, 1);
    CHECK(max_abs_diff(z0, z_masked) <= 1e-12);
  }
  SUBCASE("deterministic given seed and config") {
    const LatentClip prior = random_latent(F, C, H, W, 45, 0.3);
    const KnownMap km = uniform_known(F, H, W, 0.0);
    const auto den = make_seam_probe_denoiser(prior, 0.1);
    const LatentClip z_T = init_correlated_noise(F, C, H, W, cfg.noise_corr, 46);
    const LatentClip a = run_dual_fusion(z_T, km, LatentClip::zeros(F, C, H, W), *den, sched,
                                         cfg, opt, 1);
    const LatentClip b = run_dual_fusion(z_T, km, LatentClip::zeros(F, C, H, W), *den, sched,
                                         cfg, opt, 1);
    CHECK(a.data == b.data);
  }
  SUBCASE("threading does not change the result") {
    const LatentClip prior = random_latent(F, C, H, W, 47, 0.3);
    const KnownMap km = uniform_known(F, H, W, 0.0);
    const auto den = make_seam_probe_denoiser(prior, 0.1);
    const LatentClip z_T = init_correlated_noise(F, C, H, W, cfg.noise_corr, 48);
    const LatentClip a = run_dual_fusion(z_T, km, LatentClip::zeros(F, C, H, W), *den, sched,
                                         cfg, opt, 1);
    const LatentClip b = run_dual_fusion(z_T, km, LatentClip::zeros(F, C, H, W), *den, sched,
                                         cfg, opt, 4);
    CHECK(a.data == b.data);
  }
  SUBCASE("seam probe: fusion at {1,7} strictly beats no fusion") {
    for (uint64_t seed : {1, 2, 3}) {
      LatentClip prior = LatentClip::zeros(F, C, H, W);
      for (double& v : prior.data) v = 0.3;
      const KnownMap km = uniform_known(F, H, W, 0.0);
      const auto probe = make_seam_probe_denoiser(prior, 0.1);
      const LatentClip z_T = init_correlated_noise(F, C, H, W, cfg.noise_corr, seed);
      auto seam_with = [&](std::set<int> steps) {
        FusionConfig c2 = cfg;
        c2.fusion_steps = std::move(steps);
        const LatentClip z0 = run_dual_fusion(z_T, km, LatentClip::zeros(F, C, H, W), *probe,
                                              sched, c2, opt, 1);
        return seam_score(z0, plan_segments(F, c2));
      };
      const double none = seam_with({});
      const double ours = seam_with({1, 7});
      const double all = seam_with({1, 2, 3, 4, 5, 6, 7, 8});
      CHECK(ours < none);
      CHECK(all <= ours * 1.1);
    }
  }
  SUBCASE("adjacent windows disagree by about twice the probe amplitude") {
    LatentClip prior = LatentClip::zeros(F, C, H, W);
    for (double& v : prior.data) v = 0.3;
    const KnownMap km = uniform_known(F, H, W, 0.0);
    const auto probe = make_seam_probe_denoiser(prior, 0.1);
    const LatentClip z_T = init_correlated_noise(F, C, H, W, cfg.noise_corr, 9);
    const Schedule s8 = make_schedule(1000, 8);
    // two overlapping windows with opposite parities, run by hand
    std::vector<int> f0(24), f1(24);
    for (int i = 0; i < 24; ++i) {
      f0[i] = i;
      f1[i] = 12 + i;
    }
    LatentClip z0w = gather_frames(z_T, f0), z1w = gather_frames(z_T, f1);
    const LatentClip zm0 = LatentClip::zeros(24, C, H, W), zm1 = zm0;
    const KnownMap k24 = uniform_known(24, H, W, 0.0);
    for (int k = 0; k < 8; ++k) {
      const int t = s8.inference_indices[k];
      const int tp = (k + 1 < 8) ? s8.inference_indices[k + 1] : 0;
      DenoiseInputs in0{z0w, k24, zm0, t, s8.abar(t), &f0, 0};
      DenoiseInputs in1{z1w, k24, zm1, t, s8.abar(t), &f1, 1};
      z0w = ddim_step(z0w, probe->predict_v(in0), s8.abar(t), s8.abar(tp));
      z1w = ddim_step(z1w, probe->predict_v(in1), s8.abar(t), s8.abar(tp));
    }
    double diff = 0.0;
    size_t n = 0;
    const size_t per = z0w.per_frame();
    for (int i = 12; i < 24; ++i)
      for (size_t j = 0; j < per; ++j) {
        diff += std::fabs(z0w.data[i * per + j] - z1w.data[(i - 12) * per + j]);
        ++n;
      }
    CHECK(diff / n == doctest::Approx(0.2).epsilon(0.3));
  }
  SUBCASE("strided mode still converges with the oracle") {
    FusionConfig sc = cfg;
    sc.mode = FusionConfig::Mode::Strided;
    sc.strided_n = 4;
    const LatentClip target = random_latent(F, C, H, W, 51, 0.5);
    const LatentClip z_T = init_correlated_noise(F, C, H, W, 0.9, 52);
    const KnownMap km = uniform_known(F, H, W, 0.0);
    const auto oracle = make_oracle_denoiser(target);
    const LatentClip z0 = run_dual_fusion(z_T, km, LatentClip::zeros(F, C, H, W), *oracle,
                                          sched, sc, opt, 1);
    CHECK(max_abs_diff(z0, target) <= 1e-5);
  }
}

TEST_CASE("count_fusion_ops matches the configured step set") {
  FusionConfig cfg;  // {1,7}
  CHECK(count_fusion_ops(cfg, 8, false) == 2);
  CHECK(count_fusion_ops(cfg, 8, true) == 8);
  CHECK(1.0 - static_cast<double>(count_fusion_ops(cfg, 8, false)) /
                  count_fusion_ops(cfg, 8, true) ==
        doctest::Approx(0.75));
}
