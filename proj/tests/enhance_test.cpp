#include <random>
#include <vector>

#include "doctest.h"
#include "rfda/enhance.hpp"
#include "rfda/model.hpp"
#include "rfda/tensor.hpp"
#include "rfda/trainer.hpp"
#include "rfda/video.hpp"

using namespace rfda;

namespace {

VideoClip<double> make_clip(int T, int H, int W, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  VideoClip<double> clip;
  clip.width = W;
  clip.height = H;
  for (int t = 0; t < T; ++t) {
    Tensor<double> f({1, H, W});
    for (auto& v : f.values()) v = d(rng);
    clip.frames.push_back(f);
  }
  return clip;
}

void jitter(ModelParams<double>& p, std::uint64_t seed, double sigma = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  visit_params(p, [&](const std::string&, Tensor<double>& t, ParamGroup) {
    for (auto& v : t.values()) v += n(rng);
  });
}

}  // namespace

TEST_CASE("stack_window clamps out-of-range indices") {
  std::vector<Tensor<double>> frames;
  for (int i = 0; i < 3; ++i) frames.push_back(Tensor<double>::full({1, 2, 2}, double(i)));
  Tensor<double> w0 = stack_window(frames, 0, 2);
  REQUIRE(w0.shape() == Shape{5, 2, 2});
  const double want0[] = {0, 0, 0, 1, 2};
  for (int c = 0; c < 5; ++c) CHECK(w0.at(c, 0, 0) == want0[c]);
  Tensor<double> w2 = stack_window(frames, 2, 2);
  const double want2[] = {0, 1, 2, 2, 2};
  for (int c = 0; c < 5; ++c) CHECK(w2.at(c, 1, 1) == want2[c]);
}

TEST_CASE("freshly initialized weights pass video through unchanged") {
  // The residual projection starts at zero, so the whole pipeline reduces to
  // clamp01(x); inputs already in [0,1] must come back bit for bit, including
  // the mirror-pad/crop round trip on sizes that are not multiples of four.
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(cfg, 5, true);
  for (auto [h, w] : {std::pair{16, 16}, std::pair{10, 6}}) {
    VideoClip<double> clip = make_clip(3, h, w, 77);
    VideoClip<double> out = enhance_video(clip, params);
    REQUIRE(out.frame_count() == 3);
    CHECK(out.width == w);
    CHECK(out.height == h);
    for (int t = 0; t < 3; ++t) {
      REQUIRE(out.frames[size_t(t)].shape() == clip.frames[size_t(t)].shape());
      CHECK(out.frames[size_t(t)].values() == clip.frames[size_t(t)].values());
    }
  }
}

TEST_CASE("streaming and two-pass enhancement agree bitwise") {
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(cfg, 6, true);
  jitter(params, 60);
  VideoClip<double> clip = make_clip(5, 12, 12, 61);
  VideoClip<double> a = enhance_video(clip, params);
  VideoClip<double> b = enhance_video_two_pass(clip, params);
  REQUIRE(a.frame_count() == b.frame_count());
  for (int t = 0; t < a.frame_count(); ++t)
    CHECK(a.frames[size_t(t)].values() == b.frames[size_t(t)].values());
  // the network is actually doing something under jittered weights
  bool changed = false;
  for (int t = 0; t < a.frame_count(); ++t)
    if (a.frames[size_t(t)].values() != clip.frames[size_t(t)].values()) changed = true;
  CHECK(changed);
}

TEST_CASE("a single-frame video streams through the recurrence") {
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(cfg, 7, true);
  jitter(params, 70);
  VideoClip<double> clip = make_clip(1, 8, 8, 71);
  VideoClip<double> out = enhance_video(clip, params);
  REQUIRE(out.frame_count() == 1);
  CHECK(out.frames[0].shape() == clip.frames[0].shape());
  for (double v : out.frames[0].values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("attention sink sees one mask per frame and block") {
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(cfg, 8, true);
  jitter(params, 80);
  VideoClip<double> clip = make_clip(3, 12, 12, 81);

  struct Call {
    int frame, block;
    std::int64_t numel;
  };
  std::vector<Call> calls;
  bool in_open_interval = true;
  AttentionSink<double> sink = [&](int frame, int block, const Tensor<double>& mask) {
    calls.push_back({frame, block, mask.numel()});
    for (double v : mask.values())
      if (!(v > 0.0 && v < 1.0)) in_open_interval = false;
  };
  VideoClip<double> out = enhance_video(clip, params, &sink);
  REQUIRE(out.frame_count() == 3);
  REQUIRE(calls.size() == static_cast<std::size_t>(3 * cfg.L));
  for (std::size_t i = 0; i < calls.size(); ++i) {
    CHECK(calls[i].frame == static_cast<int>(i) / cfg.L);
    CHECK(calls[i].block == static_cast<int>(i) % cfg.L);
    CHECK(calls[i].numel > 0);
  }
  CHECK(in_open_interval);
}

TEST_CASE("enhancement validates its inputs") {
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(cfg, 9, true);
  VideoClip<double> empty;
  empty.width = empty.height = 8;
  CHECK_THROWS_AS(enhance_video(empty, params), std::invalid_argument);

  VideoClip<double> clip = make_clip(2, 8, 8, 90);
  ModelParams<double> broken = clone_params(params);
  broken.qe.blocks.clear();
  CHECK_THROWS_AS(enhance_video(clip, broken), std::invalid_argument);
}
