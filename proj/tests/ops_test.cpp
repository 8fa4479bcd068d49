#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rfda/ops.hpp"
#include "rfda/tensor.hpp"
#include "rfda/video.hpp"

using namespace rfda;

namespace {
Tensor<double> rand_t(Shape shape, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  Tensor<double> t(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.values()) v = d(rng);
  return t;
}
}  // namespace

TEST_CASE("conv2d matches hand-computed values") {
  Tensor<double> x({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor<double> w({1, 1, 2, 2}, {1, 0, 0, 1});  // main diagonal sum
  Tensor<double> b({1}, {0.5});
  Tensor<double> y = conv2d(x, w, b, 1, 0);
  REQUIRE(y.shape() == Shape{1, 2, 2});
  CHECK(y.at(0, 0, 0) == 6.5);
  CHECK(y.at(0, 0, 1) == 8.5);
  CHECK(y.at(0, 1, 0) == 12.5);
  CHECK(y.at(0, 1, 1) == 14.5);
}

TEST_CASE("conv2d zero padding contributes nothing") {
  Tensor<double> x({1, 2, 2}, {1, 2, 3, 4});
  Tensor<double> w({1, 1, 3, 3}, {0, 0, 0, 0, 0, 0, 0, 0, 1});  // bottom-right tap
  Tensor<double> b({1}, {0});
  Tensor<double> y = conv2d(x, w, b, 1, 1);
  REQUIRE(y.shape() == Shape{1, 2, 2});
  // tap reads x[r+1][c+1]; out-of-range reads are zero
  CHECK(y.at(0, 0, 0) == 4.0);
  CHECK(y.at(0, 0, 1) == 0.0);
  CHECK(y.at(0, 1, 0) == 0.0);
  CHECK(y.at(0, 1, 1) == 0.0);
}

TEST_CASE("conv2d stride subsamples the output grid") {
  Tensor<double> x({1, 4, 4});
  for (int i = 0; i < 16; ++i) x.at(i) = i;
  Tensor<double> w({1, 1, 1, 1}, {2});
  Tensor<double> b({1}, {0});
  Tensor<double> y = conv2d(x, w, b, 2, 0);
  REQUIRE(y.shape() == Shape{1, 2, 2});
  CHECK(y.at(0, 0, 0) == 0.0);
  CHECK(y.at(0, 0, 1) == 4.0);
  CHECK(y.at(0, 1, 0) == 16.0);
  CHECK(y.at(0, 1, 1) == 20.0);
}

TEST_CASE("conv2d output is translation covariant") {
  std::mt19937_64 rng(11);
  Tensor<double> x = rand_t({2, 9, 10}, rng);
  Tensor<double> w = rand_t({3, 2, 3, 3}, rng);
  Tensor<double> b = rand_t({3}, rng);
  Tensor<double> full = conv2d(x, w, b, 1, 0);  // [3,7,8]
  for (int dr = 0; dr < 2; ++dr) {
    for (int dc = 0; dc < 3; ++dc) {
      Tensor<double> sub = conv2d(crop_spatial(x, dr, dc, 7, 7), w, b, 1, 0);
      Tensor<double> want = crop_spatial(full, dr, dc, 5, 5);
      for (std::int64_t i = 0; i < want.numel(); ++i) CHECK(sub.at(static_cast<int>(i)) == want.at(static_cast<int>(i)));
    }
  }
}

TEST_CASE("conv2d rejects malformed shapes") {
  Tensor<double> x({1, 3, 3});
  Tensor<double> w({1, 2, 2, 2});  // channel mismatch
  Tensor<double> b({1});
  CHECK_THROWS_AS(conv2d(x, w, b, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(conv2d(x, Tensor<double>({1, 1, 2, 2}), Tensor<double>({2}), 1, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(conv2d(x, Tensor<double>({1, 1, 2, 2}), b, 0, 0), std::invalid_argument);
}

TEST_CASE("deformable conv with integer offsets samples shifted pixels") {
  Tensor<double> x({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor<double> w({1, 1, 1, 1}, {1});
  Tensor<double> b({1}, {0});
  Tensor<double> ov({1, 2, 3, 3});
  for (int i = 0; i < 9; ++i) ov.at(i) = 1.0;  // row offset +1, col offset 0
  Tensor<double> y = deform_conv2d(x, OffsetField<double>{ov, 1}, w, b);
  CHECK(y.at(0, 0, 0) == 4.0);
  CHECK(y.at(0, 1, 1) == 8.0);
  CHECK(y.at(0, 2, 2) == 0.0);  // shifted below the image: zero tap
}

TEST_CASE("deformable conv interpolates at half-pixel offsets") {
  Tensor<double> x({1, 1, 3}, {2, 4, 8});
  Tensor<double> w({1, 1, 1, 1}, {1});
  Tensor<double> b({1}, {0});
  Tensor<double> ov({1, 2, 1, 3});
  ov.at(0, 1, 0, 0) = 0.5;
  ov.at(0, 1, 0, 1) = 0.5;  // col offset +0.5 on first two pixels
  Tensor<double> y = deform_conv2d(x, OffsetField<double>{ov, 1}, w, b);
  CHECK(y.at(0, 0, 0) == 3.0);
  CHECK(y.at(0, 0, 1) == 6.0);
  CHECK(y.at(0, 0, 2) == 8.0);
}

TEST_CASE("deformable conv groups choose their own offsets") {
  // two channels, two groups: group 1 shifts right by 1, group 0 stays
  Tensor<double> x({2, 1, 3}, {1, 2, 3, 10, 20, 30});
  Tensor<double> w({1, 2, 1, 1}, {1, 1});
  Tensor<double> b({1}, {0});
  Tensor<double> ov({2, 2, 1, 3});
  ov.at(1, 1, 0, 0) = 1.0;
  ov.at(1, 1, 0, 1) = 1.0;
  ov.at(1, 1, 0, 2) = 1.0;
  Tensor<double> y = deform_conv2d(x, OffsetField<double>{ov, 1}, w, b);
  CHECK(y.at(0, 0, 0) == 1.0 + 20.0);
  CHECK(y.at(0, 0, 1) == 2.0 + 30.0);
  CHECK(y.at(0, 0, 2) == 3.0 + 0.0);
}

TEST_CASE("bilinear_sample oracle values") {
  Tensor<double> x({2, 2}, {1, 2, 3, 4});
  auto sample = [&](double r, double c) {
    return bilinear_sample(x, Tensor<double>({2}, {r, c})).at(0);
  };
  CHECK(sample(0, 0) == 1.0);
  CHECK(sample(1, 1) == 4.0);
  CHECK(sample(0.5, 0.5) == 2.5);
  CHECK(sample(0, 0.25) == 1.25);
  CHECK(sample(-1, 0) == 0.0);   // fully outside
  CHECK(sample(-0.5, 0) == 0.5); // halfway off the edge: missing taps read zero
}

TEST_CASE("avg_pool2d divides by the full window even at borders") {
  Tensor<double> x({1, 2, 2}, {1, 2, 3, 4});
  Tensor<double> y = avg_pool2d(x, 2, 2, 0);
  REQUIRE(y.shape() == Shape{1, 1, 1});
  CHECK(y.at(0) == 2.5);
  // 3x3 window, pad 1: padded taps count as zeros in the mean
  Tensor<double> z = avg_pool2d(x, 3, 1, 1);
  CHECK(z.at(0, 0, 0) == 10.0 / 9.0);
}

TEST_CASE("upsample_bilinear doubles size with aligned corners semantics") {
  Tensor<double> x({1, 1, 2}, {0, 2});
  Tensor<double> y = upsample_bilinear(x, 2);
  REQUIRE(y.shape() == Shape{1, 2, 4});
  // rows identical; columns interpolate the half-resolution grid
  CHECK(y.at(0, 0, 0) == y.at(0, 1, 0));
  CHECK(y.at(0, 0, 0) + y.at(0, 0, 3) == doctest::Approx(2.0));
  double mono = -1;
  for (int c = 0; c < 4; ++c) {
    CHECK(y.at(0, 0, c) >= mono);
    mono = y.at(0, 0, c);
  }
}

TEST_CASE("pointwise ops and broadcasts") {
  Tensor<double> x({2, 2}, {-1, 0, 0.5, 2});
  CHECK(relu(x).at(0) == 0.0);
  CHECK(relu(x).at(3) == 2.0);
  CHECK(sigmoid(Tensor<double>::scalar(0.0)).at(0) == 0.5);
  CHECK(clamp01(x).at(0) == 0.0);
  CHECK(clamp01(x).at(2) == 0.5);
  CHECK(clamp01(x).at(3) == 1.0);
  CHECK(scale(x, 2.0).at(3) == 4.0);

  Tensor<double> a({2, 1, 1}, {10, 20});
  Tensor<double> y({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  Tensor<double> s = add(y, a);  // per-channel broadcast
  CHECK(s.at(0, 0, 0) == 11.0);
  CHECK(s.at(1, 1, 1) == 28.0);
  Tensor<double> m = mul(y, a);
  CHECK(m.at(0, 1, 1) == 40.0);
  CHECK(m.at(1, 0, 0) == 100.0);
}

TEST_CASE("concat and slice are inverses") {
  std::mt19937_64 rng(3);
  Tensor<double> a = rand_t({2, 3, 3}, rng);
  Tensor<double> b = rand_t({1, 3, 3}, rng);
  std::vector<Tensor<double>> parts{a, b};
  Tensor<double> cat = concat_channels(std::span<const Tensor<double>>(parts));
  REQUIRE(cat.shape() == Shape{3, 3, 3});
  Tensor<double> a2 = slice_channels(cat, 0, 2);
  Tensor<double> b2 = slice_channels(cat, 2, 3);
  for (int i = 0; i < a.numel(); ++i) CHECK(a2.at(i) == a.at(i));
  for (int i = 0; i < b.numel(); ++i) CHECK(b2.at(i) == b.at(i));
}

TEST_CASE("reductions and reshape") {
  Tensor<double> x({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(sum_all(x).at(0) == 21.0);
  Tensor<double> g = global_avg_pool(Tensor<double>({2, 1, 2}, {1, 3, 10, 30}));
  REQUIRE(g.shape() == Shape{2});
  CHECK(g.at(0) == 2.0);
  CHECK(g.at(1) == 20.0);
  Tensor<double> r = reshape(x, {3, 2});
  CHECK(r.at(2, 1) == 6.0);
  CHECK_THROWS_AS(reshape(x, {4, 2}), std::invalid_argument);
}

TEST_CASE("fully_connected oracle") {
  Tensor<double> x({2}, {1, 2});
  Tensor<double> w({3, 2}, {1, 0, 0, 1, 1, 1});
  Tensor<double> b({3}, {0.5, 0.5, 0.5});
  Tensor<double> y = fully_connected(x, w, b);
  CHECK(y.at(0) == 1.5);
  CHECK(y.at(1) == 2.5);
  CHECK(y.at(2) == 3.5);
}

TEST_CASE("charbonnier loss formula") {
  Tensor<double> x({2}, {1.0, 2.0});
  Tensor<double> t({2}, {1.5, 2.0});
  const double eps = 1e-6;
  double want = (std::sqrt(0.25 + eps) + std::sqrt(0.0 + eps)) / 2.0;
  CHECK(charbonnier_loss(x, t, eps).at(0) == doctest::Approx(want).epsilon(1e-12));
  // smooth everywhere: finite and positive even at zero error
  CHECK(charbonnier_loss(t, t, eps).at(0) > 0.0);
}

TEST_CASE("pad_reflect_to_multiple mirrors without repeating the edge") {
  Tensor<double> x({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor<double> y = pad_reflect_to_multiple(x, 4);
  REQUIRE(y.shape() == Shape{1, 4, 4});
  CHECK(y.at(0, 0, 0) == 1.0);
  CHECK(y.at(0, 0, 3) == 2.0);  // col pattern c0 c1 c2 c1
  CHECK(y.at(0, 3, 0) == 4.0);  // row pattern r0 r1 r2 r1
  CHECK(y.at(0, 3, 3) == 5.0);
  Tensor<double> same = pad_reflect_to_multiple(x, 1);
  CHECK(same.shape() == x.shape());
  // mirroring farther than the image extends is refused, not invented
  CHECK_THROWS_AS(pad_reflect_to_multiple(Tensor<double>({1, 2, 2}), 4),
                  std::invalid_argument);
}
