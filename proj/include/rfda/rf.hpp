#pragma once

#include <optional>

#include "rfda/model.hpp"
#include "rfda/ops.hpp"

namespace rfda {

// Fused feature map for one frame plus its 1-based position in the sequence.
template <typename S>
struct HiddenState {
  Tensor<S> feature;  // [F,H,W]
  int frame_index = 1;
};

// Aligns the previous hidden state to the current frame: a two-conv offset
// head on concat(h_t, h_prev) yields one 2-d displacement per channel per
// pixel, applied as a per-channel deformable 1x1 sample followed by the
// learned 1x1 channel mix.
template <typename S>
Tensor<S> sub_fusion_align(const HiddenState<S>& h_t, const HiddenState<S>& h_prev,
                           const RfParams<S>& p);

// Residual from concat(h_t, aligned) through conv-relu-conv.
template <typename S>
Tensor<S> feature_extract(const HiddenState<S>& h_t, const Tensor<S>& aligned,
                          const RfParams<S>& p);

// One recurrence step: pass-through at the first frame, otherwise
// h_t + beta * feature_extract(h_t, sub_fusion_align(h_t, h_prev)).
template <typename S>
HiddenState<S> rf_step(const HiddenState<S>& h_t,
                       const std::optional<HiddenState<S>>& h_prev,
                       const RfParams<S>& p, S beta);

#define RFDA_RF_DECL(S)                                                              \
  extern template Tensor<S> sub_fusion_align(const HiddenState<S>&,                  \
                                             const HiddenState<S>&,                  \
                                             const RfParams<S>&);                    \
  extern template Tensor<S> feature_extract(const HiddenState<S>&, const Tensor<S>&, \
                                            const RfParams<S>&);                     \
  extern template HiddenState<S> rf_step(const HiddenState<S>&,                      \
                                         const std::optional<HiddenState<S>>&,       \
                                         const RfParams<S>&, S);
RFDA_RF_DECL(float)
RFDA_RF_DECL(double)
#undef RFDA_RF_DECL

}  // namespace rfda
