#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rfda/metrics.hpp"
#include "rfda/tensor.hpp"
#include "rfda/video.hpp"

using namespace rfda;

namespace {
VideoClip<double> noise_clip(int T, int H, int W, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  VideoClip<double> clip;
  clip.width = W;
  clip.height = H;
  for (int t = 0; t < T; ++t) {
    Tensor<double> f({H, W});
    for (auto& v : f.values()) v = d(rng);
    clip.frames.push_back(f);
  }
  return clip;
}

double clip_mse(const VideoClip<double>& a, const VideoClip<double>& b) {
  double acc = 0;
  std::int64_t n = 0;
  for (int t = 0; t < a.frame_count(); ++t) {
    for (std::int64_t i = 0; i < a.frames[size_t(t)].numel(); ++i) {
      const double d =
          a.frames[size_t(t)].at(static_cast<int>(i)) - b.frames[size_t(t)].at(static_cast<int>(i));
      acc += d * d;
      ++n;
    }
  }
  return acc / static_cast<double>(n);
}
}  // namespace

TEST_CASE("degrade keeps values in range and is deterministic") {
  VideoClip<double> clip = noise_clip(2, 16, 16, 5);
  VideoClip<double> d1 = degrade_clip(clip, 24);
  VideoClip<double> d2 = degrade_clip(clip, 24);
  for (int t = 0; t < 2; ++t)
    for (int i = 0; i < 256; ++i) {
      const double v = d1.frames[size_t(t)].at(i);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(v == d2.frames[size_t(t)].at(i));
    }
}

TEST_CASE("degradation error grows with the quality knob") {
  VideoClip<double> clip = noise_clip(1, 24, 24, 9);
  const double e4 = clip_mse(clip, degrade_clip(clip, 4));
  const double e16 = clip_mse(clip, degrade_clip(clip, 16));
  const double e48 = clip_mse(clip, degrade_clip(clip, 48));
  CHECK(e4 < e16);
  CHECK(e16 < e48);
  CHECK(e48 > 0.0);
}

TEST_CASE("gentlest setting is near-lossless on smooth content") {
  VideoClip<double> clip;
  clip.width = 16;
  clip.height = 16;
  Tensor<double> f({16, 16});
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) f.at(r * 16 + c) = 0.25 + 0.4 * (r + c) / 30.0;
  clip.frames.push_back(f);
  VideoClip<double> d = degrade_clip(clip, 1);
  CHECK(psnr(d.frames[0], clip.frames[0]) > 45.0);
}

TEST_CASE("blocks degrade independently") {
  VideoClip<double> whole = noise_clip(1, 16, 16, 13);
  VideoClip<double> dw = degrade_clip(whole, 32);
  // degrade one 8x8 block on its own: same bits as that block within the image
  for (int br = 0; br < 2; ++br)
    for (int bc = 0; bc < 2; ++bc) {
      VideoClip<double> part;
      part.width = part.height = 8;
      Tensor<double> blk({8, 8});
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) blk.at(r * 8 + c) = whole.frames[0].at(br * 8 + r, bc * 8 + c);
      part.frames.push_back(blk);
      VideoClip<double> dp = degrade_clip(part, 32);
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          CHECK(dp.frames[0].at(r, c) == dw.frames[0].at(br * 8 + r, bc * 8 + c));
    }
}

TEST_CASE("degrade rejects bad arguments") {
  VideoClip<double> clip = noise_clip(1, 8, 8, 1);
  CHECK_THROWS_AS(degrade_clip(clip, 0), std::invalid_argument);
  VideoClip<double> ragged = clip;
  ragged.width = 7;
  CHECK_THROWS_AS(degrade_clip(ragged, 8), std::invalid_argument);
}

TEST_CASE("quantization table is the standard luma table") {
  const auto& q = jpeg_luma_table();
  CHECK(q[0] == 16.0);
  CHECK(q[1] == 11.0);
  CHECK(q[63] == 99.0);
}

TEST_CASE("psnr scale and cap") {
  Tensor<double> a = Tensor<double>::full({8, 8}, 0.5);
  Tensor<double> b = Tensor<double>::full({8, 8}, 0.6);
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(psnr(a, a) == 100.0);  // zero error saturates instead of overflowing
  // halving the error adds ~6.02 dB
  Tensor<double> c = Tensor<double>::full({8, 8}, 0.55);
  CHECK(psnr(a, c) - psnr(a, b) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("ssim basics") {
  std::mt19937_64 rng(21);
  Tensor<double> a({16, 16});
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (auto& v : a.values()) v = d(rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  Tensor<double> b = a.clone();
  for (auto& v : b.values()) v = std::min(1.0, v + 0.2 * d(rng));
  const double s = ssim(a, b);
  CHECK(s < 1.0);
  CHECK(s > 0.0);
  CHECK(ssim(b, a) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("quality fluctuation statistics") {
  // one strict peak at 32 followed by a valley at 30: single drop of 2
  FluctuationStats s = quality_fluctuation({30, 32, 30, 32, 30});
  REQUIRE(s.pvd.has_value());
  CHECK(*s.pvd == 2.0);
  FluctuationStats flat = quality_fluctuation({31, 31, 31});
  CHECK_FALSE(flat.pvd.has_value());
  CHECK(flat.sd == 0.0);
  FluctuationStats sd = quality_fluctuation({30, 32, 30, 32});
  CHECK(sd.sd == 1.0);
  // plateaus collapse: peak value repeated twice still pairs with one valley
  FluctuationStats plat = quality_fluctuation({30, 32, 32, 30, 31});
  REQUIRE(plat.pvd.has_value());
  CHECK(*plat.pvd == 2.0);
}

TEST_CASE("delta metrics compare enhancement against the compressed baseline") {
  std::vector<Tensor<double>> gt{Tensor<double>::full({16, 16}, 0.5)};
  std::vector<Tensor<double>> comp{Tensor<double>::full({16, 16}, 0.6)};
  std::vector<Tensor<double>> enh{Tensor<double>::full({16, 16}, 0.55)};
  auto [dp, ds] = delta_metrics(enh, comp, gt);
  CHECK(dp == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
  auto [zp, zs] = delta_metrics(comp, comp, gt);
  CHECK(zp == 0.0);
  CHECK(zs == 0.0);
}

TEST_CASE("evaluate_clips fills a coherent report") {
  VideoClip<double> gt = noise_clip(4, 16, 16, 31);
  VideoClip<double> comp = degrade_clip(gt, 32);
  MetricsReport rep = evaluate_clips(comp.frames, comp.frames, gt.frames);
  REQUIRE(rep.per_frame_psnr.size() == 4);
  REQUIRE(rep.per_frame_ssim.size() == 4);
  CHECK(rep.delta_psnr == 0.0);
  CHECK(rep.delta_ssim == 0.0);
  for (double v : rep.per_frame_ssim) CHECK(v <= 1.0);

  const std::string js = rep.to_json();
  CHECK(js.find("\"delta_psnr\"") != std::string::npos);
  CHECK(js.find("\"per_frame_psnr\"") != std::string::npos);
  CHECK(js.find("\"per_frame_ssim\"") != std::string::npos);
  const std::string csv = rep.to_csv();
  CHECK(csv.find("frame") != std::string::npos);
}
