#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <span>

#include "doctest.h"
#include "rfda/model.hpp"
#include "rfda/ops.hpp"
#include "rfda/tensor.hpp"
#include "rfda/trainer.hpp"
#include "rfda/video.hpp"

using namespace rfda;

namespace {

VideoClip<double> smooth_clip(int T, int H, int W, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.2, 0.8);
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

Dataset<double> small_dataset() {
  Dataset<double> data;
  for (std::uint64_t s : {5, 6}) {
    DataVideo<double> dv;
    dv.gt = smooth_clip(3, 24, 24, s);
    dv.compressed = degrade_clip(dv.gt, 32);
    data.push_back(dv);
  }
  return data;
}

bool params_equal(ModelParams<double>& a, ModelParams<double>& b) {
  bool same = true;
  std::map<std::string, std::vector<double>> va;
  visit_params(a, [&](const std::string& n, Tensor<double>& t, ParamGroup) { va[n] = t.values(); });
  visit_params(b, [&](const std::string& n, Tensor<double>& t, ParamGroup) {
    auto it = va.find(n);
    if (it == va.end() || it->second != t.values()) same = false;
  });
  return same;
}

}  // namespace

TEST_CASE("learning-rate decay has inclusive thresholds") {
  TrainConfig cfg;
  cfg.total_iters = 1000;
  CHECK(lr_decay_factor(0, cfg) == 1.0);
  CHECK(lr_decay_factor(599, cfg) == 1.0);
  CHECK(lr_decay_factor(600, cfg) == 0.5);
  CHECK(lr_decay_factor(899, cfg) == 0.5);
  CHECK(lr_decay_factor(900, cfg) == 0.25);
  CHECK(lr_decay_factor(999, cfg) == 0.25);
  CHECK(lr_schedule(700, cfg) == cfg.base_lr * 0.5);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.validate();
  TrainConfig bad = cfg;
  bad.stage = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.crop = 10;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.decay_point1 = 0.95;  // past decay_point2
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.eps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.bptt = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("dihedral hand values") {
  Tensor<double> x({1, 2, 2}, {1, 2, 3, 4});
  Tensor<double> r = dihedral(x, 1);  // one clockwise quarter turn
  CHECK(r.at(0, 0, 0) == 3.0);
  CHECK(r.at(0, 0, 1) == 1.0);
  CHECK(r.at(0, 1, 0) == 4.0);
  CHECK(r.at(0, 1, 1) == 2.0);
  Tensor<double> f = dihedral(x, 4);  // horizontal mirror
  CHECK(f.at(0, 0, 0) == 2.0);
  CHECK(f.at(0, 0, 1) == 1.0);
  CHECK(f.at(0, 1, 0) == 4.0);
}

TEST_CASE("dihedral group axioms by enumeration") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1, 1);
  Tensor<double> x({2, 5, 5});
  for (auto& v : x.values()) v = d(rng);
  for (int a = 0; a < 8; ++a) {
    Tensor<double> there = dihedral(x, a);
    Tensor<double> back = dihedral(there, dihedral_inverse(a));
    CHECK(back.values() == x.values());
    for (int b = 0; b < 8; ++b) {
      Tensor<double> two = dihedral(there, b);
      Tensor<double> one = dihedral(x, dihedral_compose(a, b));
      CHECK(two.values() == one.values());
    }
  }
}

TEST_CASE("dihedral rejects bad input") {
  Tensor<double> wide({1, 3, 4});
  for (int w : {0, 2, 4, 6}) CHECK_NOTHROW(dihedral(wide, w));
  for (int w : {1, 3, 5, 7}) CHECK_THROWS_AS(dihedral(wide, w), std::invalid_argument);
  Tensor<double> sq({1, 3, 3});
  CHECK_THROWS_AS(dihedral(sq, 8), std::invalid_argument);
  CHECK_THROWS_AS(dihedral(sq, -1), std::invalid_argument);
  CHECK_THROWS_AS(dihedral(Tensor<double>({3, 3}), 0), std::invalid_argument);
}

TEST_CASE("extend_clamped repeats the edges and shares storage") {
  std::vector<Tensor<double>> frames;
  for (int i = 0; i < 3; ++i) frames.push_back(Tensor<double>::full({1, 2, 2}, double(i)));
  std::vector<Tensor<double>> w = extend_clamped(frames, 0, 3, 2);
  REQUIRE(w.size() == 7);
  const double want[] = {0, 0, 0, 1, 2, 2, 2};
  for (int i = 0; i < 7; ++i) CHECK(w[size_t(i)].at(0) == want[i]);
  CHECK(w[0].same_storage(frames[0]));
  CHECK(w[6].same_storage(frames[2]));
  CHECK_THROWS_AS(extend_clamped(std::vector<Tensor<double>>{}, 0, 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(extend_clamped(frames, 0, 0, 1), std::invalid_argument);
}

TEST_CASE("one-frame clip loss equals the single-frame loss") {
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(cfg, 17, true);
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> d(0.1, 0.9);
  std::vector<Tensor<double>> comp;
  for (int i = 0; i < 1 + 2 * cfg.R; ++i) {
    Tensor<double> f({1, 16, 16});
    for (auto& v : f.values()) v = d(rng);
    comp.push_back(f);
  }
  Tensor<double> gt({1, 16, 16});
  for (auto& v : gt.values()) v = d(rng);

  Tensor<double> window = concat_channels(std::span<const Tensor<double>>(comp));
  Tensor<double> lf = frame_loss(params, window, gt, 1e-6);
  Tensor<double> lc = clip_loss(params, comp, {gt}, 1e-6, 0);
  CHECK(lf.at(0) == doctest::Approx(lc.at(0)).epsilon(1e-14));
}

TEST_CASE("adam follows the textbook update for two steps") {
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(cfg, 42, true);
  AdamOpt<double> adam(params);

  const double lr_s = 1e-3, lr_r = 3e-4, lr_q = 1e-4;
  std::map<std::string, ParamGroup> groups;
  std::map<std::string, std::vector<double>> p0, g1, g2, m, v;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gdist(0.0, 1e-2);

  auto fill_grads = [&](std::map<std::string, std::vector<double>>& out) {
    visit_params(params, [&](const std::string& n, Tensor<double>& t, ParamGroup g) {
      groups[n] = g;
      double* gr = t.grad();
      REQUIRE(gr != nullptr);
      std::vector<double> vals(static_cast<std::size_t>(t.numel()));
      for (auto& x : vals) x = gdist(rng);
      for (std::size_t i = 0; i < vals.size(); ++i) gr[i] = vals[i];
      out[n] = vals;
    });
  };

  visit_params(params, [&](const std::string& n, Tensor<double>& t, ParamGroup) {
    p0[n] = t.values();
    m[n].assign(static_cast<std::size_t>(t.numel()), 0.0);
    v[n].assign(static_cast<std::size_t>(t.numel()), 0.0);
  });

  fill_grads(g1);
  double norm_sq = 0;
  for (auto& [n, g] : g1)
    for (double x : g) norm_sq += x * x;
  const double norm1 = adam.step(lr_s, lr_r, lr_q, 1e9);
  CHECK(norm1 == doctest::Approx(std::sqrt(norm_sq)).epsilon(1e-12));
  CHECK(adam.steps_taken() == 1);

  // grads are consumed: the buffers must be zero after the step
  visit_params(params, [&](const std::string&, Tensor<double>& t, ParamGroup) {
    const double* gr = t.grad();
    for (std::int64_t i = 0; i < t.numel(); ++i) CHECK(gr[i] == 0.0);
  });

  auto reference_step = [&](const std::map<std::string, std::vector<double>>& g, long step) {
    const double bc1 = 1.0 - std::pow(0.9, double(step));
    const double bc2 = 1.0 - std::pow(0.999, double(step));
    for (auto& [n, gv] : g) {
      const double lr = groups[n] == ParamGroup::Rf    ? lr_r
                        : groups[n] == ParamGroup::Stdf ? lr_s
                                                        : lr_q;
      for (std::size_t i = 0; i < gv.size(); ++i) {
        m[n][i] = 0.9 * m[n][i] + 0.1 * gv[i];
        v[n][i] = 0.999 * v[n][i] + 0.001 * gv[i] * gv[i];
        p0[n][i] -= lr * (m[n][i] / bc1) / (std::sqrt(v[n][i] / bc2) + 1e-8);
      }
    }
  };

  reference_step(g1, 1);
  fill_grads(g2);
  adam.step(lr_s, lr_r, lr_q, 1e9);
  reference_step(g2, 2);

  double max_diff = 0;
  visit_params(params, [&](const std::string& n, Tensor<double>& t, ParamGroup) {
    const std::vector<double>& want = p0[n];
    for (std::int64_t i = 0; i < t.numel(); ++i)
      max_diff = std::max(max_diff, std::abs(t.at(int(i)) - want[size_t(i)]));
  });
  CHECK(max_diff <= 1e-12);
}

TEST_CASE("global-norm clipping rescales the whole gradient") {
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> a = init_params<double>(cfg, 43, true);
  ModelParams<double> b = clone_params(a);
  AdamOpt<double> oa(a), ob(b);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> gdist(0.0, 1e-2);
  std::vector<double> flat;
  visit_params(a, [&](const std::string&, Tensor<double>& t, ParamGroup) {
    double* gr = t.grad();
    for (std::int64_t i = 0; i < t.numel(); ++i) {
      gr[i] = gdist(rng);
      flat.push_back(gr[i]);
    }
  });
  // accumulate the norm in the optimizer's own visit order
  double norm_sq = 0;
  for (double x : flat) norm_sq += x * x;
  const double norm = std::sqrt(norm_sq);
  REQUIRE(norm > 1.0);

  const double rescale = 1.0 / norm;
  std::size_t k = 0;
  visit_params(b, [&](const std::string&, Tensor<double>& t, ParamGroup) {
    double* gr = t.grad();
    for (std::int64_t i = 0; i < t.numel(); ++i) gr[i] = flat[k++] * rescale;
  });

  const double ra = oa.step(1e-3, 1e-3, 1e-3, 1.0);  // clip to unit norm
  ob.step(1e-3, 1e-3, 1e-3, 1e9);                    // pre-scaled, no clip
  CHECK(ra == doctest::Approx(norm).epsilon(1e-12));
  CHECK(params_equal(a, b));
}

TEST_CASE("adam rejects non-finite gradients") {
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(cfg, 44, true);
  AdamOpt<double> adam(params);
  bool first = true;
  visit_params(params, [&](const std::string&, Tensor<double>& t, ParamGroup) {
    if (first) {
      t.grad()[0] = std::numeric_limits<double>::quiet_NaN();
      first = false;
    }
  });
  CHECK_THROWS_AS(adam.step(1e-3, 1e-3, 1e-3, 5.0), std::runtime_error);
}

TEST_CASE("training is deterministic under a fixed seed") {
  Dataset<double> data = small_dataset();
  TrainConfig cfg;
  cfg.stage = 1;
  cfg.total_iters = 10;
  cfg.batch_size = 2;
  cfg.crop = 16;
  cfg.log_every = 5;
  cfg.seed = 11;

  ModelConfig mc = ModelConfig::tiny();
  ModelParams<double> run1 = train_stage1<double>(data, mc, cfg);
  ModelParams<double> run2 = train_stage1<double>(data, mc, cfg);
  CHECK(params_equal(run1, run2));

  TrainConfig cfg2 = cfg;
  cfg2.stage = 2;
  cfg2.total_iters = 4;
  cfg2.batch_size = 1;
  cfg2.clip_len = 2;
  cfg2.seed = 12;
  ModelParams<double> s2a = train_stage2<double>(data, run1, cfg2);
  ModelParams<double> s2b = train_stage2<double>(data, run1, cfg2);
  CHECK(params_equal(s2a, s2b));
  CHECK_FALSE(params_equal(run1, s2a));  // it actually trained
}

TEST_CASE("stage-2 training reaches every parameter") {
  // The offset and residual projections start at zero, so gradients reach the
  // layers behind them only after a few optimizer steps move those
  // projections off zero.  The deepest chain needs four steps.
  Dataset<double> data = small_dataset();
  ModelConfig mc = ModelConfig::tiny();
  ModelParams<double> params = init_params<double>(mc, 21, true);
  TrainConfig cfg;
  cfg.stage = 2;
  cfg.total_iters = 6;
  cfg.batch_size = 1;
  cfg.crop = 16;
  cfg.clip_len = 2;
  cfg.seed = 13;
  Trainer<double> tr(params, data, cfg);
  tr.enable_grad_audit(6);
  TrainStats stats = tr.run();
  REQUIRE(stats.loss_curve.size() == 6);
  REQUIRE(stats.grad_norms.size() == 6);
  for (double g : stats.grad_norms) CHECK(g > 0.0);
  const std::vector<std::string> misses = tr.grad_audit_misses();
  std::string all;
  for (const auto& s : misses) all += s + " ";
  INFO(all);
  CHECK(misses.empty());
}

TEST_CASE("a poisoned batch aborts with diagnostics") {
  Dataset<double> data = small_dataset();
  for (auto& dv : data)
    for (auto& f : dv.gt.frames) f.at(0, 5, 5) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.stage = 1;
  cfg.total_iters = 3;
  cfg.batch_size = 1;
  cfg.crop = 24;  // full frame, so the bad pixel is always sampled
  cfg.seed = 14;

  ModelConfig mc = ModelConfig::tiny();
  try {
    train_stage1<double>(data, mc, cfg);
    FAIL("expected TrainAbort");
  } catch (const TrainAbort& e) {
    CHECK(e.iteration == 0);
    CHECK(e.lr == doctest::Approx(cfg.base_lr));
    REQUIRE(e.recent_losses.size() == 1);
    CHECK_FALSE(std::isfinite(e.recent_losses[0]));
  }
}
