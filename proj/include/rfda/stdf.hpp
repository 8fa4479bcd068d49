#pragma once

#include "rfda/model.hpp"
#include "rfda/ops.hpp"

namespace rfda {

// The frame window is a [2R+1, H, W] stack of consecutive compressed frames
// centered on the target; H and W must be divisible by 4 (two stride-2
// levels in the offset predictor).

// U-Net offset predictor: per input frame, per kernel tap, a 2-d sampling
// displacement at every pixel -> [2R+1, 2K*K, H, W].
template <typename S>
OffsetField<S> predict_offsets(const Tensor<S>& window, const StdfParams<S>& p,
                               const ModelConfig& cfg);

// Grouped deformable fusion of the window into an [F,H,W] feature map; each
// frame forms its own offset group.
template <typename S>
Tensor<S> fuse_frames(const Tensor<S>& window, const OffsetField<S>& offsets,
                      const StdfParams<S>& p);

template <typename S>
Tensor<S> stdf_forward(const Tensor<S>& window, const StdfParams<S>& p,
                       const ModelConfig& cfg);

#define RFDA_STDF_DECL(S)                                                           \
  extern template OffsetField<S> predict_offsets(const Tensor<S>&,                  \
                                                 const StdfParams<S>&,              \
                                                 const ModelConfig&);               \
  extern template Tensor<S> fuse_frames(const Tensor<S>&, const OffsetField<S>&,    \
                                        const StdfParams<S>&);                      \
  extern template Tensor<S> stdf_forward(const Tensor<S>&, const StdfParams<S>&,    \
                                         const ModelConfig&);
RFDA_STDF_DECL(float)
RFDA_STDF_DECL(double)
#undef RFDA_STDF_DECL

}  // namespace rfda
