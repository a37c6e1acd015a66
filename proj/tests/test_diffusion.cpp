#include <cmath>

#include "doctest.h"
#include "vip/diffusion.hpp"
#include "vip/error.hpp"
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

}  // namespace

TEST_CASE("schedule: strictly decreasing alpha_bar with the stated start") {
  const Schedule s = make_schedule(1000, 8);
  CHECK(s.alpha_bar[0] == 1.0);
  CHECK(s.alpha_bar[1] == doctest::Approx(1.0 - 8.5e-4).epsilon(1e-12));
  for (int t = 1; t <= 1000; ++t) {
    CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
    CHECK(s.alpha_bar[t] > 0.0);
  }
}

TEST_CASE("schedule: inference index spacing") {
  SUBCASE("8 of 1000 lands on multiples of 125, descending") {
    const Schedule s = make_schedule(1000, 8);
    const std::vector<int> expect{1000, 875, 750, 625, 500, 375, 250, 125};
    CHECK(s.inference_indices == expect);
  }
  SUBCASE("all steps gives T..1") {
    const Schedule s = make_schedule(20, 20);
    for (int k = 0; k < 20; ++k) CHECK(s.inference_indices[k] == 20 - k);
  }
  SUBCASE("bad counts are rejected") {
    try {
      make_schedule(10, 11);
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
    }
  }
}

TEST_CASE("v-prediction algebra") {
  const LatentClip x0 = random_latent(2, 4, 3, 3, 21);
  const LatentClip eps = random_latent(2, 4, 3, 3, 22);

  SUBCASE("abar = 1 gives v = eps") {
    const LatentClip v = v_from(x0, eps, 1.0);
    CHECK(max_abs_diff(v, eps) < 1e-12);
  }
  SUBCASE("abar = 0 gives v = -x0") {
    LatentClip v = v_from(x0, eps, 0.0);
    for (size_t i = 0; i < v.data.size(); ++i) v.data[i] = -v.data[i];
    CHECK(max_abs_diff(v, x0) < 1e-12);
  }
  SUBCASE("round trips hold across noise levels") {
    for (double abar : {0.01, 0.1, 0.5, 0.9, 0.99}) {
      const double sa = std::sqrt(abar), som = std::sqrt(1.0 - abar);
      LatentClip z = x0;
      for (size_t i = 0; i < z.data.size(); ++i)
        z.data[i] = sa * x0.data[i] + som * eps.data[i];
      const LatentClip v = v_from(x0, eps, abar);
      const auto [x0h, epsh] = x0_eps_from_v(z, v, abar);
      CHECK(max_abs_diff(x0h, x0) <= 1e-6);
      CHECK(max_abs_diff(epsh, eps) <= 1e-6);
      LatentClip z2 = x0h;
      for (size_t i = 0; i < z2.data.size(); ++i)
        z2.data[i] = sa * x0h.data[i] + som * epsh.data[i];
      CHECK(max_abs_diff(z2, z) <= 1e-6);
    }
  }
  SUBCASE("abar = 1 recovers x0 = z_t") {
    const LatentClip z = random_latent(2, 4, 3, 3, 23);
    const auto [x0h, epsh] = x0_eps_from_v(z, x0, 1.0);
    CHECK(max_abs_diff(x0h, z) < 1e-12);
  }
}

TEST_CASE("ddim_step") {
  const LatentClip x0 = random_latent(1, 4, 4, 4, 31);
  const LatentClip eps = random_latent(1, 4, 4, 4, 32);
  const double abar_t = 0.36;
  LatentClip z_t = x0;
  for (size_t i = 0; i < z_t.data.size(); ++i)
    z_t.data[i] = std::sqrt(abar_t) * x0.data[i] + std::sqrt(1 - abar_t) * eps.data[i];
  const LatentClip v = v_from(x0, eps, abar_t);

  SUBCASE("abar_prev = 1 returns x0") {
    const LatentClip z0 = ddim_step(z_t, v, abar_t, 1.0);
    CHECK(max_abs_diff(z0, x0) <= 1e-12);
  }
  SUBCASE("true v gives the exact forward-noised x0 at the new level") {
    const double abar_prev = 0.81;
    const LatentClip z_prev = ddim_step(z_t, v, abar_t, abar_prev);
    LatentClip expect = x0;
    for (size_t i = 0; i < expect.data.size(); ++i)
      expect.data[i] =
          std::sqrt(abar_prev) * x0.data[i] + std::sqrt(1 - abar_prev) * eps.data[i];
    CHECK(max_abs_diff(z_prev, expect) <= 1e-12);
  }
  SUBCASE("abar_prev = abar_t is a fixed point") {
    const LatentClip z2 = ddim_step(z_t, v, abar_t, abar_t);
    CHECK(max_abs_diff(z2, z_t) <= 1e-12);
  }
}

TEST_CASE("oracle denoiser drives sampling to the target") {
  const LatentClip target = random_latent(3, 4, 2, 2, 41);
  const LatentClip z_T = random_latent(3, 4, 2, 2, 42);
  const KnownMap hole_everywhere = uniform_known(3, 2, 2, 0.0);
  const LatentClip z_masked = LatentClip::zeros(3, 4, 2, 2);
  const auto oracle = make_oracle_denoiser(target);

  for (int steps : {1, 4, 8}) {
    const Schedule sched = make_schedule(1000, steps);
    const LatentClip z0 =
        sample(z_T, hole_everywhere, z_masked, *oracle, sched, SampleOptions{true});
    CHECK(max_abs_diff(z0, target) <= 1e-5);
  }
}

TEST_CASE("oracle denoiser rejects shape mismatch") {
  const auto oracle = make_oracle_denoiser(random_latent(2, 4, 2, 2, 51));
  const LatentClip z = random_latent(3, 4, 2, 2, 52);
  const KnownMap km = uniform_known(3, 2, 2, 0.0);
  const Schedule sched = make_schedule(1000, 2);
  try {
    sample(z, km, z, *oracle, sched, SampleOptions{false});
    FAIL("expected ContractViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ContractViolation);
  }
}

TEST_CASE("known reinjection pins an all-known clip to z_masked") {
  const LatentClip z_masked = random_latent(2, 4, 3, 3, 61, 0.5);
  const LatentClip z_T = random_latent(2, 4, 3, 3, 62);
  const KnownMap all_known = uniform_known(2, 3, 3, 1.0);
  // denoiser output is irrelevant on fully known content
  const auto den = make_prior_denoiser(LatentClip::zeros(2, 4, 3, 3));
  const Schedule sched = make_schedule(1000, 8);
  const LatentClip z0 = sample(z_T, all_known, z_masked, *den, sched, SampleOptions{true});
  CHECK(max_abs_diff(z0, z_masked) <= 1e-12);
}

TEST_CASE("prior denoiser behavior") {
  const LatentClip prior = random_latent(2, 4, 3, 3, 71, 0.5);
  const LatentClip z_T = random_latent(2, 4, 3, 3, 72);
  const Schedule sched = make_schedule(1000, 8);

  SUBCASE("with an all-hole map it behaves as an oracle for the prior") {
    const KnownMap km = uniform_known(2, 3, 3, 0.0);
    const auto den = make_prior_denoiser(prior);
    const LatentClip z0 =
        sample(z_T, km, LatentClip::zeros(2, 4, 3, 3), *den, sched, SampleOptions{false});
    CHECK(max_abs_diff(z0, prior) <= 1e-5);
  }
  SUBCASE("constant offset in the hole converges to the offset prior") {
    LatentClip shifted = prior;
    for (double& v : shifted.data) v += 0.25;
    const KnownMap km = uniform_known(2, 3, 3, 0.0);
    const auto den = make_prior_denoiser(shifted);
    const LatentClip z0 =
        sample(z_T, km, LatentClip::zeros(2, 4, 3, 3), *den, sched, SampleOptions{false});
    CHECK(max_abs_diff(z0, shifted) <= 1e-5);
  }
  SUBCASE("with no hole the output matches the known content") {
    const KnownMap km = uniform_known(2, 3, 3, 1.0);
    const LatentClip z_masked = random_latent(2, 4, 3, 3, 73, 0.5);
    const auto den = make_prior_denoiser(prior);
    const LatentClip z0 = sample(z_T, km, z_masked, *den, sched, SampleOptions{true});
    CHECK(max_abs_diff(z0, z_masked) <= 1e-12);
  }
}

TEST_CASE("seam probe with amplitude 0 equals the prior denoiser") {
  const LatentClip prior = random_latent(2, 4, 3, 3, 81, 0.5);
  const LatentClip z_t = random_latent(2, 4, 3, 3, 82);
  const LatentClip z_masked = random_latent(2, 4, 3, 3, 83, 0.3);
  const KnownMap km = uniform_known(2, 3, 3, 0.0);
  const auto probe = make_seam_probe_denoiser(prior, 0.0);
  const auto plain = make_prior_denoiser(prior);
  const DenoiseInputs in{z_t, km, z_masked, 500, 0.5, nullptr, 1};
  CHECK(max_abs_diff(probe->predict_v(in), plain->predict_v(in)) == 0.0);
}

TEST_CASE("latent_loss") {
  SUBCASE("worked 2x2 example with w1=1, w2=2") {
    LatentClip v_hat = LatentClip::zeros(1, 1, 2, 2);
    const LatentClip v_true = LatentClip::zeros(1, 1, 2, 2);
    v_hat.at(0, 0, 0, 0) = 0.5;
    v_hat.at(0, 0, 1, 0) = 1.0;
    KnownMap km = uniform_known(1, 2, 2, 0.0);
    km.at(0, 0, 0) = 1.0;
    km.at(0, 1, 0) = 1.0;
    const double loss = latent_loss(v_hat, v_true, km, LossWeights{1.0, 2.0, 3.0});
    CHECK(loss == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("zero when predictions match") {
    const LatentClip v = random_latent(2, 4, 3, 3, 91);
    const KnownMap km = uniform_known(2, 3, 3, 0.4);
    CHECK(latent_loss(v, v, km, LossWeights{}) == 0.0);
  }
  SUBCASE("all-hole map reduces to w2 * mean") {
    const LatentClip v_hat = random_latent(1, 4, 3, 3, 92);
    const LatentClip v_true = random_latent(1, 4, 3, 3, 93);
    const KnownMap km = uniform_known(1, 3, 3, 0.0);
    double mean = 0.0;
    for (size_t i = 0; i < v_hat.data.size(); ++i)
      mean += std::fabs(v_hat.data[i] - v_true.data[i]);
    mean /= static_cast<double>(v_hat.data.size());
    const LossWeights w{1.0, 2.0, 3.0};
    CHECK(latent_loss(v_hat, v_true, km, w) == doctest::Approx(2.0 * mean).epsilon(1e-12));
  }
  SUBCASE("matches an independent summation oracle on random tensors") {
    const LatentClip v_hat = random_latent(2, 4, 4, 4, 94);
    const LatentClip v_true = random_latent(2, 4, 4, 4, 95);
    Rng rng(96);
    KnownMap km = uniform_known(2, 4, 4, 0.0);
    for (double& v : km.data) v = rng.uniform01();
    const LossWeights w{1.0, 2.0, 3.0};
    // oracle: explicit two-region normalized sums
    double ks = 0, kw = 0, hs = 0, hw = 0;
    for (int f = 0; f < 2; ++f)
      for (int c = 0; c < 4; ++c)
        for (int y = 0; y < 4; ++y)
          for (int x = 0; x < 4; ++x) {
            const double d = std::fabs(v_hat.at(f, c, y, x) - v_true.at(f, c, y, x));
            const double m = km.at(f, y, x);
            ks += d * m;
            kw += m;
            hs += d * (1 - m);
            hw += 1 - m;
          }
    const double expect = w.w1 * ks / kw + w.w2 * hs / hw;
    CHECK(latent_loss(v_hat, v_true, km, w) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("scales linearly in the weights") {
    const LatentClip v_hat = random_latent(1, 4, 2, 2, 97);
    const LatentClip v_true = random_latent(1, 4, 2, 2, 98);
    KnownMap km = uniform_known(1, 2, 2, 0.0);
    km.at(0, 0, 0) = 1.0;
    const double base = latent_loss(v_hat, v_true, km, LossWeights{1.0, 1.0, 0.0});
    const double twice = latent_loss(v_hat, v_true, km, LossWeights{2.0, 2.0, 0.0});
    CHECK(twice == doctest::Approx(2.0 * base).epsilon(1e-12));
  }
}

TEST_CASE("pixel_loss") {
  SUBCASE("zero on codec-reproducing input") {
    VideoClip x;
    x.frames.push_back(Frame::constant(16, 16, 3, 0.42));
    CHECK(pixel_loss(x, encode(x)) <= 1e-6);
  }
  SUBCASE("constant offset shows up as |delta|") {
    VideoClip x;
    x.frames.push_back(Frame::constant(16, 16, 3, 0.5));
    const LatentClip z0 = encode(x);
    VideoClip shifted = x;
    for (double& v : shifted.frames[0].data) v += 0.125;
    CHECK(pixel_loss(shifted, z0) == doctest::Approx(0.125).epsilon(1e-9));
  }
  SUBCASE("equals a brute-force MAE oracle") {
    Rng rng(99);
    VideoClip x;
    Frame fr = Frame::zeros(16, 16, 3);
    for (double& v : fr.data) v = rng.uniform01();
    x.frames.push_back(fr);
    const LatentClip z0 = encode(x);
    const VideoClip dec = decode(z0);
    double mae = 0.0;
    for (size_t i = 0; i < fr.data.size(); ++i)
      mae += std::fabs(fr.data[i] - dec.frames[0].data[i]);
    mae /= static_cast<double>(fr.data.size());
    CHECK(pixel_loss(x, z0) == doctest::Approx(mae).epsilon(1e-12));
  }
}

TEST_CASE("total_loss combines with alpha") {
  CHECK(total_loss(1.0, 0.5, LossWeights{1, 2, 3}) == doctest::Approx(2.5));
  CHECK(total_loss(0.7, 0.0, LossWeights{1, 2, 3}) == doctest::Approx(0.7));
  CHECK(total_loss(0.7, 9.0, LossWeights{1, 2, 0}) == doctest::Approx(0.7));
}
