#include "rfda/rf.hpp"

#include <array>
#include <stdexcept>

namespace rfda {

namespace {

template <typename S>
void check_pair(const HiddenState<S>& h_t, const HiddenState<S>& h_prev) {
  if (!h_t.feature.valid() || !h_prev.feature.valid() ||
      h_t.feature.shape() != h_prev.feature.shape())
    throw std::invalid_argument("rf: hidden-state shape mismatch");
  if (h_prev.frame_index != h_t.frame_index - 1)
    throw std::invalid_argument("rf: states must be consecutive (got " +
                                std::to_string(h_prev.frame_index) + " then " +
                                std::to_string(h_t.frame_index) + ")");
}

}  // namespace

template <typename S>
Tensor<S> sub_fusion_align(const HiddenState<S>& h_t, const HiddenState<S>& h_prev,
                           const RfParams<S>& p) {
  check_pair(h_t, h_prev);
  const int F = h_t.feature.dim(0), H = h_t.feature.dim(1), W = h_t.feature.dim(2);
  std::array<Tensor<S>, 2> pair{h_t.feature, h_prev.feature};
  Tensor<S> z = relu(conv2d(concat_channels(std::span<const Tensor<S>>(pair)),
                            p.off1.w, p.off1.b, 1, 1));
  Tensor<S> raw = conv2d(z, p.off2.w, p.off2.b, 1, 1);  // [2F,H,W]
  OffsetField<S> off;
  off.kernel = 1;
  off.values = reshape(raw, {F, 2, H, W});
  return deform_conv2d(h_prev.feature, off, p.mix.w, p.mix.b);
}

template <typename S>
Tensor<S> feature_extract(const HiddenState<S>& h_t, const Tensor<S>& aligned,
                          const RfParams<S>& p) {
  if (!aligned.valid() || aligned.shape() != h_t.feature.shape())
    throw std::invalid_argument("rf: aligned feature shape mismatch");
  std::array<Tensor<S>, 2> pair{h_t.feature, aligned};
  Tensor<S> z = relu(conv2d(concat_channels(std::span<const Tensor<S>>(pair)),
                            p.fe1.w, p.fe1.b, 1, 1));
  return conv2d(z, p.fe2.w, p.fe2.b, 1, 1);
}

template <typename S>
HiddenState<S> rf_step(const HiddenState<S>& h_t,
                       const std::optional<HiddenState<S>>& h_prev,
                       const RfParams<S>& p, S beta) {
  if (h_t.frame_index == 1) {
    if (h_prev)
      throw std::invalid_argument("rf: first frame cannot have a previous state");
    return h_t;
  }
  if (!h_prev)
    throw std::invalid_argument("rf: frame " + std::to_string(h_t.frame_index) +
                                " needs the previous hidden state");
  Tensor<S> aligned = sub_fusion_align(h_t, *h_prev, p);
  Tensor<S> residual = feature_extract(h_t, aligned, p);
  return HiddenState<S>{add(h_t.feature, scale(residual, beta)), h_t.frame_index};
}

#define RFDA_RF_DEF(S)                                                        \
  template Tensor<S> sub_fusion_align(const HiddenState<S>&,                  \
                                      const HiddenState<S>&,                  \
                                      const RfParams<S>&);                    \
  template Tensor<S> feature_extract(const HiddenState<S>&, const Tensor<S>&, \
                                     const RfParams<S>&);                     \
  template HiddenState<S> rf_step(const HiddenState<S>&,                      \
                                  const std::optional<HiddenState<S>>&,       \
                                  const RfParams<S>&, S);
RFDA_RF_DEF(float)
RFDA_RF_DEF(double)
#undef RFDA_RF_DEF

}  // namespace rfda
