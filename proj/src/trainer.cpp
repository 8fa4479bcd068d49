#include "rfda/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <random>
#include <sstream>

#include "rfda/dsta.hpp"
#include "rfda/enhance.hpp"
#include "rfda/metrics.hpp"
#include "rfda/ops.hpp"
#include "rfda/rf.hpp"
#include "rfda/stdf.hpp"

namespace rfda {

void TrainConfig::validate() const {
  if (stage != 1 && stage != 2) throw std::invalid_argument("stage must be 1 or 2");
  if (total_iters <= 0) throw std::invalid_argument("total_iters must be positive");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (crop <= 0 || crop % 4 != 0)
    throw std::invalid_argument("crop must be a positive multiple of 4");
  if (clip_len <= 0) throw std::invalid_argument("clip_len must be positive");
  if (base_lr <= 0 || stage2_lr_stdf_qe <= 0 || stage2_lr_rf <= 0)
    throw std::invalid_argument("learning rates must be positive");
  if (!(decay_point1 > 0) || !(decay_point1 <= decay_point2) || !(decay_point2 <= 1))
    throw std::invalid_argument("decay points must satisfy 0 < p1 <= p2 <= 1");
  if (!(decay_factor > 0) || !(decay_factor <= 1))
    throw std::invalid_argument("decay_factor must be in (0,1]");
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  if (bptt < 0) throw std::invalid_argument("bptt must be non-negative");
  if (grad_clip < 0) throw std::invalid_argument("grad_clip must be non-negative");
  if (log_every <= 0) throw std::invalid_argument("log_every must be positive");
  if (val_every < 0) throw std::invalid_argument("val_every must be non-negative");
}

double lr_decay_factor(int iter, const TrainConfig& cfg) {
  const double p = static_cast<double>(iter);
  if (p >= cfg.decay_point2 * cfg.total_iters) return cfg.decay_factor * cfg.decay_factor;
  if (p >= cfg.decay_point1 * cfg.total_iters) return cfg.decay_factor;
  return 1.0;
}

double lr_schedule(int iter, const TrainConfig& cfg) {
  return cfg.base_lr * lr_decay_factor(iter, cfg);
}

namespace {

std::string abort_message(const std::string& msg, int iter, double lr,
                          const std::vector<double>& hist) {
  std::ostringstream os;
  os << msg << " at iteration " << iter << " (lr " << lr << "; recent losses:";
  for (double v : hist) os << ' ' << v;
  os << ')';
  return os.str();
}

std::vector<double> tail_of(const std::vector<double>& v, std::size_t n) {
  const std::size_t from = v.size() > n ? v.size() - n : 0;
  return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(from), v.end());
}

template <typename S>
Tensor<S> rot90cw(const Tensor<S>& x) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  Tensor<S> out({C, W, H});
  for (int c = 0; c < C; ++c)
    for (int r = 0; r < W; ++r)
      for (int cc = 0; cc < H; ++cc) out.at(c, r, cc) = x.at(c, H - 1 - cc, r);
  return out;
}

template <typename S>
Tensor<S> fliph(const Tensor<S>& x) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  Tensor<S> out({C, H, W});
  for (int c = 0; c < C; ++c)
    for (int r = 0; r < H; ++r)
      for (int cc = 0; cc < W; ++cc) out.at(c, r, cc) = x.at(c, r, W - 1 - cc);
  return out;
}

int pick(std::mt19937_64& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

// [1,h,w] frames stacked along the channel axis -> [n,h,w].
template <typename S>
Tensor<S> stack_list(const std::vector<Tensor<S>>& frames, int from, int n) {
  const Tensor<S>& f0 = frames[static_cast<std::size_t>(from)];
  const int h = f0.dim(f0.ndim() - 2), w = f0.dim(f0.ndim() - 1);
  Tensor<S> out({n, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  for (int i = 0; i < n; ++i) {
    const Tensor<S>& f = frames[static_cast<std::size_t>(from + i)];
    if (static_cast<std::size_t>(f.numel()) != plane)
      throw std::invalid_argument("stack_list: frame size mismatch");
    std::memcpy(out.data() + static_cast<std::size_t>(i) * plane, f.data(),
                plane * sizeof(S));
  }
  return out;
}

template <typename S>
void require_frame(const Tensor<S>& f, const char* what) {
  if (f.ndim() != 3 || f.dim(0) != 1)
    throw std::invalid_argument(std::string(what) + " must be [1,H,W]");
}

}  // namespace

TrainAbort::TrainAbort(const std::string& msg, int iter, double lr_now,
                       std::vector<double> hist)
    : std::runtime_error(abort_message(msg, iter, lr_now, hist)),
      iteration(iter),
      lr(lr_now),
      recent_losses(std::move(hist)) {}

template <typename S>
Tensor<S> dihedral(const Tensor<S>& x, int which) {
  if (x.ndim() != 3) throw std::invalid_argument("dihedral expects [C,H,W]");
  if (which < 0 || which >= 8) throw std::invalid_argument("dihedral index must be in [0,8)");
  const int k = which & 3;
  if ((k & 1) && x.dim(1) != x.dim(2))
    throw std::invalid_argument("quarter-turn rotations need square frames");
  Tensor<S> out = x.clone();
  for (int i = 0; i < k; ++i) out = rot90cw(out);
  if (which & 4) out = fliph(out);
  return out;
}

int dihedral_inverse(int which) {
  const int k = which & 3;
  return (which & 4) ? which : ((4 - k) & 3);
}

// Element f*4+k acts as "rotate k quarter turns, then flip if f"; with
// R*F = F*R^-1 the product (apply `first`, then `then`) reduces to one index.
int dihedral_compose(int first, int then) {
  const int k1 = first & 3, f1 = (first >> 2) & 1;
  const int k2 = then & 3, f2 = (then >> 2) & 1;
  const int f = f1 ^ f2;
  const int k = f1 ? ((k1 - k2) & 3) : ((k1 + k2) & 3);
  return (f << 2) | k;
}

template <typename S>
std::vector<Tensor<S>> extend_clamped(const std::vector<Tensor<S>>& frames, int t0, int len,
                                      int R) {
  if (frames.empty()) throw std::invalid_argument("extend_clamped: empty sequence");
  if (len <= 0 || R < 0) throw std::invalid_argument("extend_clamped: bad range");
  const int T = static_cast<int>(frames.size());
  std::vector<Tensor<S>> out;
  out.reserve(static_cast<std::size_t>(len + 2 * R));
  for (int i = 0; i < len + 2 * R; ++i)
    out.push_back(frames[static_cast<std::size_t>(std::clamp(t0 - R + i, 0, T - 1))]);
  return out;
}

template <typename S>
Tensor<S> frame_loss(const ModelParams<S>& params, const Tensor<S>& window,
                     const Tensor<S>& gt_frame, double eps) {
  const ModelConfig& cfg = params.config;
  Tensor<S> h = stdf_forward(window, params.stdf, cfg);
  Tensor<S> target = slice_channels(window, cfg.R, cfg.R + 1);
  Tensor<S> enhanced = qe_forward(h, target, params.qe, cfg.K);
  return charbonnier_loss(enhanced, gt_frame, eps);
}

template <typename S>
Tensor<S> clip_loss(const ModelParams<S>& params, const std::vector<Tensor<S>>& comp,
                    const std::vector<Tensor<S>>& gt, double eps, int bptt) {
  const ModelConfig& cfg = params.config;
  const int n = static_cast<int>(gt.size());
  if (n <= 0) throw std::invalid_argument("clip_loss: empty clip");
  if (static_cast<int>(comp.size()) != n + 2 * cfg.R)
    throw std::invalid_argument("clip_loss: need gt.size() + 2R compressed frames");
  for (const Tensor<S>& f : comp) require_frame(f, "compressed frame");
  for (const Tensor<S>& f : gt) require_frame(f, "ground-truth frame");

  std::optional<HiddenState<S>> prev;
  Tensor<S> sum;
  for (int t = 0; t < n; ++t) {
    Tensor<S> window = stack_list(comp, t, cfg.window());
    HiddenState<S> cur{stdf_forward(window, params.stdf, cfg), t + 1};
    HiddenState<S> state = params.rf ? rf_step(cur, prev, *params.rf, static_cast<S>(cfg.beta))
                                     : cur;
    Tensor<S> enhanced =
        qe_forward(state.feature, comp[static_cast<std::size_t>(t + cfg.R)], params.qe, cfg.K);
    Tensor<S> lt = charbonnier_loss(enhanced, gt[static_cast<std::size_t>(t)], eps);
    sum = (t == 0) ? lt : add(sum, lt);
    prev = state;
    if (bptt > 0 && (t + 1) % bptt == 0) prev->feature = detach(prev->feature);
  }
  return scale(sum, static_cast<S>(1.0 / n));
}

template <typename S>
AdamOpt<S>::AdamOpt(ModelParams<S>& params) {
  visit_params(params, [&](const std::string& n, Tensor<S>& t, ParamGroup g) {
    t.set_requires_grad(true);
    Slot s;
    s.name = n;
    s.t = t;
    s.group = g;
    s.m.assign(static_cast<std::size_t>(t.numel()), S(0));
    s.v.assign(static_cast<std::size_t>(t.numel()), S(0));
    slots_.push_back(std::move(s));
  });
}

template <typename S>
double AdamOpt<S>::step(double lr_stdf, double lr_rf, double lr_qe, double clip_norm) {
  double norm_sq = 0;
  for (const Slot& s : slots_) {
    const S* g = s.t.grad();
    if (!g) throw std::logic_error("parameter lost its grad buffer: " + s.name);
    const std::int64_t n = s.t.numel();
    for (std::int64_t i = 0; i < n; ++i)
      norm_sq += static_cast<double>(g[i]) * static_cast<double>(g[i]);
  }
  if (!std::isfinite(norm_sq)) throw std::runtime_error("non-finite gradient norm");
  const double norm = std::sqrt(norm_sq);
  const double rescale = (clip_norm > 0 && norm > clip_norm) ? clip_norm / norm : 1.0;

  ++step_;
  const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(step_));
  for (Slot& s : slots_) {
    const double lr = s.group == ParamGroup::Rf    ? lr_rf
                      : s.group == ParamGroup::Stdf ? lr_stdf
                                                    : lr_qe;
    S* p = s.t.data();
    const S* g = s.t.grad();
    const std::int64_t n = s.t.numel();
    for (std::int64_t i = 0; i < n; ++i) {
      const double gi = static_cast<double>(g[i]) * rescale;
      const double m = 0.9 * static_cast<double>(s.m[static_cast<std::size_t>(i)]) + 0.1 * gi;
      const double v =
          0.999 * static_cast<double>(s.v[static_cast<std::size_t>(i)]) + 0.001 * gi * gi;
      s.m[static_cast<std::size_t>(i)] = static_cast<S>(m);
      s.v[static_cast<std::size_t>(i)] = static_cast<S>(v);
      const double upd = lr * (m / bc1) / (std::sqrt(v / bc2) + 1e-8);
      p[i] = static_cast<S>(static_cast<double>(p[i]) - upd);
    }
    s.t.zero_grad();
  }
  return norm;
}

template <typename S>
Trainer<S>::Trainer(ModelParams<S>& params, const Dataset<S>& data, const TrainConfig& cfg)
    : params_(params), data_(data), cfg_(cfg) {
  cfg_.validate();
  params_.config.validate();
  if (data_.empty()) throw std::invalid_argument("empty training set");
  if (cfg_.stage == 2 && !params_.rf)
    throw std::invalid_argument("stage 2 needs the recurrent block");
  for (const DataVideo<S>& v : data_) {
    if (v.gt.frame_count() == 0 || v.gt.frame_count() != v.compressed.frame_count())
      throw std::invalid_argument("ground-truth / compressed frame count mismatch");
    if (v.gt.width != v.compressed.width || v.gt.height != v.compressed.height)
      throw std::invalid_argument("ground-truth / compressed size mismatch");
    if (v.gt.height < cfg_.crop || v.gt.width < cfg_.crop)
      throw std::invalid_argument("video smaller than the training crop");
  }
}

template <typename S>
TrainStats Trainer<S>::run(std::ostream* csv_log, const Observer& obs) {
  std::mt19937_64 rng(cfg_.seed);
  AdamOpt<S> adam(params_);
  if (audit_iters_ > 0) {
    audit_names_ = param_names(params_);
    audit_seen_.assign(audit_names_.size(), false);
  }
  TrainStats stats;
  stats.loss_curve.reserve(static_cast<std::size_t>(cfg_.total_iters));
  stats.grad_norms.reserve(static_cast<std::size_t>(cfg_.total_iters));
  const int R = params_.config.R;
  if (csv_log) *csv_log << "iter,lr,loss,delta_psnr\n";

  // Per sample the generator is consumed in a fixed order (video, frame,
  // crop row, crop col, symmetry) so runs with equal seeds are identical.
  auto prep = [&](const Tensor<S>& frame, int rr, int cc, int aug) {
    return dihedral(crop_spatial(frame, rr, cc, cfg_.crop, cfg_.crop), aug);
  };

  for (int iter = 0; iter < cfg_.total_iters; ++iter) {
    const double lr = lr_schedule(iter, cfg_);
    double loss_val = 0;
    {
      GradTape<S> tape;
      Tensor<S> total;
      for (int b = 0; b < cfg_.batch_size; ++b) {
        const DataVideo<S>& dv = data_[static_cast<std::size_t>(pick(rng, static_cast<int>(data_.size())))];
        const int T = dv.gt.frame_count();
        const int H = dv.gt.frames[0].dim(1), W = dv.gt.frames[0].dim(2);
        Tensor<S> item_loss;
        if (cfg_.stage == 1) {
          const int t = pick(rng, T);
          const int rr = pick(rng, H - cfg_.crop + 1), cc = pick(rng, W - cfg_.crop + 1);
          const int aug = pick(rng, 8);
          std::vector<Tensor<S>> wf;
          wf.reserve(static_cast<std::size_t>(params_.config.window()));
          for (int j = 0; j < params_.config.window(); ++j) {
            const int idx = std::clamp(t - R + j, 0, T - 1);
            wf.push_back(prep(dv.compressed.frames[static_cast<std::size_t>(idx)], rr, cc, aug));
          }
          Tensor<S> window = stack_list(wf, 0, params_.config.window());
          Tensor<S> gtf = prep(dv.gt.frames[static_cast<std::size_t>(t)], rr, cc, aug);
          item_loss = frame_loss(params_, window, gtf, cfg_.eps);
        } else {
          const int len = std::min(cfg_.clip_len, T);
          const int t0 = pick(rng, T - len + 1);
          const int rr = pick(rng, H - cfg_.crop + 1), cc = pick(rng, W - cfg_.crop + 1);
          const int aug = pick(rng, 8);
          std::vector<Tensor<S>> comp;
          comp.reserve(static_cast<std::size_t>(len + 2 * R));
          for (int i = 0; i < len + 2 * R; ++i) {
            const int idx = std::clamp(t0 - R + i, 0, T - 1);
            comp.push_back(prep(dv.compressed.frames[static_cast<std::size_t>(idx)], rr, cc, aug));
          }
          std::vector<Tensor<S>> gts;
          gts.reserve(static_cast<std::size_t>(len));
          for (int tt = 0; tt < len; ++tt)
            gts.push_back(prep(dv.gt.frames[static_cast<std::size_t>(t0 + tt)], rr, cc, aug));
          item_loss = clip_loss(params_, comp, gts, cfg_.eps, cfg_.bptt);
        }
        total = (b == 0) ? item_loss : add(total, item_loss);
      }
      Tensor<S> loss = scale(total, static_cast<S>(1.0 / cfg_.batch_size));
      loss_val = static_cast<double>(loss.at(0));
      stats.loss_curve.push_back(loss_val);
      if (!std::isfinite(loss_val))
        throw TrainAbort("non-finite loss", iter, lr, tail_of(stats.loss_curve, 10));
      tape.backward(loss);
    }

    if (iter < audit_iters_) {
      std::size_t i = 0;
      visit_params(params_, [&](const std::string&, Tensor<S>& t, ParamGroup) {
        if (!audit_seen_[i]) {
          const S* g = t.grad();
          const std::int64_t n = t.numel();
          for (std::int64_t k = 0; g && k < n; ++k)
            if (g[k] != S(0)) {
              audit_seen_[i] = true;
              break;
            }
        }
        ++i;
      });
    }

    double gnorm = 0;
    try {
      const bool s2 = cfg_.stage == 2;
      const double f = lr_decay_factor(iter, cfg_);
      const double lr_sq = (s2 ? cfg_.stage2_lr_stdf_qe : cfg_.base_lr) * f;
      const double lr_rf = (s2 ? cfg_.stage2_lr_rf : cfg_.base_lr) * f;
      gnorm = adam.step(lr_sq, lr_rf, lr_sq, cfg_.grad_clip);
    } catch (const std::logic_error&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw TrainAbort(e.what(), iter, lr, tail_of(stats.loss_curve, 10));
    }
    stats.grad_norms.push_back(gnorm);

    if (obs) obs(iter, lr, loss_val);
    if (csv_log && (iter % cfg_.log_every == 0 || iter == cfg_.total_iters - 1)) {
      *csv_log << iter << ',' << lr << ',' << loss_val << ',';
      if (cfg_.val_every > 0 && (iter % cfg_.val_every == 0 || iter == cfg_.total_iters - 1))
        *csv_log << probe_delta_psnr();
      *csv_log << '\n';
    }
  }
  return stats;
}

template <typename S>
double Trainer<S>::probe_delta_psnr() const {
  const DataVideo<S>& dv = data_.front();
  const int n = std::min(cfg_.clip_len, dv.compressed.frame_count());
  VideoClip<S> comp{dv.compressed.width, dv.compressed.height,
                    {dv.compressed.frames.begin(), dv.compressed.frames.begin() + n}};
  VideoClip<S> out = enhance_video(comp, params_);
  const std::vector<Tensor<S>> gts(dv.gt.frames.begin(), dv.gt.frames.begin() + n);
  return delta_metrics(out.frames, comp.frames, gts).first;
}

template <typename S>
std::vector<std::string> Trainer<S>::grad_audit_misses() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < audit_names_.size(); ++i)
    if (!audit_seen_[i]) out.push_back(audit_names_[i]);
  return out;
}

template <typename S>
ModelParams<S> clone_params(const ModelParams<S>& p) {
  ModelParams<S> q = p;
  visit_params(q, [](const std::string&, Tensor<S>& t, ParamGroup) { t = t.clone(); });
  return q;
}

template <typename S>
ModelParams<S> train_stage1(const Dataset<S>& data, const ModelConfig& model_cfg,
                            const TrainConfig& cfg, std::ostream* csv_log,
                            const typename Trainer<S>::Observer& obs) {
  TrainConfig c = cfg;
  c.stage = 1;
  ModelParams<S> params = init_params<S>(model_cfg, c.seed, false);
  Trainer<S> tr(params, data, c);
  tr.run(csv_log, obs);
  return params;
}

template <typename S>
ModelParams<S> train_stage2(const Dataset<S>& data, const ModelParams<S>& stage1,
                            const TrainConfig& cfg, std::ostream* csv_log,
                            const typename Trainer<S>::Observer& obs) {
  TrainConfig c = cfg;
  c.stage = 2;
  ModelParams<S> params = clone_params(stage1);
  if (!params.rf) params.rf = init_rf_params<S>(params.config, c.seed);
  Trainer<S> tr(params, data, c);
  tr.run(csv_log, obs);
  return params;
}

#define RFDA_TRAINER_IMPL(S)                                                              \
  template Tensor<S> dihedral(const Tensor<S>&, int);                                     \
  template std::vector<Tensor<S>> extend_clamped(const std::vector<Tensor<S>>&, int, int, \
                                                 int);                                    \
  template Tensor<S> frame_loss(const ModelParams<S>&, const Tensor<S>&, const Tensor<S>&, \
                                double);                                                  \
  template Tensor<S> clip_loss(const ModelParams<S>&, const std::vector<Tensor<S>>&,      \
                               const std::vector<Tensor<S>>&, double, int);               \
  template class AdamOpt<S>;                                                              \
  template class Trainer<S>;                                                              \
  template ModelParams<S> clone_params(const ModelParams<S>&);                            \
  template ModelParams<S> train_stage1(const Dataset<S>&, const ModelConfig&,             \
                                       const TrainConfig&, std::ostream*,                 \
                                       const typename Trainer<S>::Observer&);             \
  template ModelParams<S> train_stage2(const Dataset<S>&, const ModelParams<S>&,          \
                                       const TrainConfig&, std::ostream*,                 \
                                       const typename Trainer<S>::Observer&);
RFDA_TRAINER_IMPL(float)
RFDA_TRAINER_IMPL(double)
#undef RFDA_TRAINER_IMPL

}  // namespace rfda
