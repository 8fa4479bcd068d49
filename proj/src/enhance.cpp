#include "rfda/enhance.hpp"

#include <algorithm>
#include <cstring>
#include <optional>
#include <stdexcept>

#include "rfda/dsta.hpp"
#include "rfda/rf.hpp"
#include "rfda/stdf.hpp"

namespace rfda {

template <typename S>
Tensor<S> stack_window(const std::vector<Tensor<S>>& frames, int t, int R) {
  if (frames.empty()) throw std::invalid_argument("stack_window: no frames");
  if (t < 0 || t >= static_cast<int>(frames.size()))
    throw std::invalid_argument("stack_window: frame index out of range");
  const int T = static_cast<int>(frames.size());
  const int H = frames[0].dim(frames[0].ndim() - 2);
  const int W = frames[0].dim(frames[0].ndim() - 1);
  Tensor<S> win({2 * R + 1, H, W});
  S* d = win.data();
  const std::size_t HW = static_cast<std::size_t>(H) * W;
  for (int j = 0; j <= 2 * R; ++j) {
    const int src = std::clamp(t - R + j, 0, T - 1);
    if (frames[src].numel() != static_cast<std::int64_t>(HW))
      throw std::invalid_argument("stack_window: inconsistent frame sizes");
    std::memcpy(d + static_cast<std::size_t>(j) * HW, frames[src].data(), sizeof(S) * HW);
  }
  return win;
}

namespace {

template <typename S>
void check_params(const VideoClip<S>& clip, const ModelParams<S>& params) {
  const ModelConfig& c = params.config;
  c.validate();
  if (clip.frames.empty()) throw std::invalid_argument("enhance: empty clip");
  if (!params.stdf.fusion.w.valid() || params.stdf.fusion.w.dim(0) != c.F ||
      params.stdf.fusion.w.dim(1) != c.window() || params.stdf.fusion.w.dim(2) != c.K)
    throw std::invalid_argument("enhance: weights do not match the declared architecture");
  if (static_cast<int>(params.qe.blocks.size()) != c.L)
    throw std::invalid_argument("enhance: head block count does not match L");
}

}  // namespace

template <typename S>
VideoClip<S> enhance_video(const VideoClip<S>& clip, const ModelParams<S>& params,
                           const AttentionSink<S>* dump) {
  check_params(clip, params);
  const ModelConfig& cfg = params.config;
  const int T = clip.frame_count(), H = clip.height, W = clip.width;

  std::vector<Tensor<S>> padded;
  padded.reserve(T);
  for (const Tensor<S>& f : clip.frames) padded.push_back(pad_reflect_to_multiple(f, 4));

  VideoClip<S> out;
  out.width = W;
  out.height = H;
  std::optional<HiddenState<S>> prev;
  for (int t = 0; t < T; ++t) {
    Tensor<S> win = stack_window(padded, t, cfg.R);
    HiddenState<S> h{stdf_forward(win, params.stdf, cfg), t + 1};
    HiddenState<S> hp = params.rf
                            ? rf_step(h, prev, *params.rf, static_cast<S>(cfg.beta))
                            : h;
    Tensor<S> enhanced = qe_forward(hp.feature, padded[t], params.qe, cfg.K);
    if (dump && *dump) {
      std::vector<Tensor<S>> masks = dump_attention(hp.feature, params.qe, cfg.K);
      for (std::size_t b = 0; b < masks.size(); ++b)
        (*dump)(t, static_cast<int>(b), masks[b]);
    }
    out.frames.push_back(enhanced.dim(1) == H && enhanced.dim(2) == W
                             ? enhanced
                             : crop_spatial(enhanced, 0, 0, H, W));
    prev = hp;
  }
  return out;
}

template <typename S>
VideoClip<S> enhance_video_two_pass(const VideoClip<S>& clip, const ModelParams<S>& params) {
  check_params(clip, params);
  const ModelConfig& cfg = params.config;
  const int T = clip.frame_count(), H = clip.height, W = clip.width;

  std::vector<Tensor<S>> padded;
  for (const Tensor<S>& f : clip.frames) padded.push_back(pad_reflect_to_multiple(f, 4));

  std::vector<Tensor<S>> fused;
  for (int t = 0; t < T; ++t)
    fused.push_back(stdf_forward(stack_window(padded, t, cfg.R), params.stdf, cfg));

  std::vector<HiddenState<S>> states;
  std::optional<HiddenState<S>> prev;
  for (int t = 0; t < T; ++t) {
    HiddenState<S> h{fused[t], t + 1};
    HiddenState<S> hp = params.rf
                            ? rf_step(h, prev, *params.rf, static_cast<S>(cfg.beta))
                            : h;
    states.push_back(hp);
    prev = hp;
  }

  VideoClip<S> out;
  out.width = W;
  out.height = H;
  for (int t = 0; t < T; ++t) {
    Tensor<S> enhanced = qe_forward(states[t].feature, padded[t], params.qe, cfg.K);
    out.frames.push_back(enhanced.dim(1) == H && enhanced.dim(2) == W
                             ? enhanced
                             : crop_spatial(enhanced, 0, 0, H, W));
  }
  return out;
}

#define RFDA_ENHANCE_DEF(S)                                                       \
  template Tensor<S> stack_window(const std::vector<Tensor<S>>&, int, int);       \
  template VideoClip<S> enhance_video(const VideoClip<S>&, const ModelParams<S>&, \
                                      const AttentionSink<S>*);                   \
  template VideoClip<S> enhance_video_two_pass(const VideoClip<S>&,               \
                                               const ModelParams<S>&);
RFDA_ENHANCE_DEF(float)
RFDA_ENHANCE_DEF(double)
#undef RFDA_ENHANCE_DEF

}  // namespace rfda
