#pragma once

#include <vector>

#include "rfda/model.hpp"
#include "rfda/ops.hpp"

namespace rfda {

// Two-scale offset predictor for the attention deformable conv, run at the
// quarter-resolution feature z:[F/4,h,w] -> [1, 2K*K, h, w].
template <typename S>
OffsetField<S> predict_attention_offsets(const Tensor<S>& z, const DstaParams<S>& p,
                                         int K);

template <typename S>
struct DstaOut {
  Tensor<S> out;       // x * mask * channel weights
  Tensor<S> mask;      // [1,H,W] in (0,1)
  Tensor<S> channels;  // [F] in (0,1)
};

template <typename S>
DstaOut<S> dsta_block_full(const Tensor<S>& x, const DstaParams<S>& p, int K);

template <typename S>
Tensor<S> dsta_block(const Tensor<S>& x, const DstaParams<S>& p, int K);

// Enhancement head: entry conv, L x [attention block, conv+relu], exit conv;
// the result is a residual added to the target frame and clamped to [0,1].
template <typename S>
Tensor<S> qe_forward(const Tensor<S>& h_state, const Tensor<S>& target_frame,
                     const QeParams<S>& p, int K);

// Per-block spatial attention masks for the same input (diagnostic).
template <typename S>
std::vector<Tensor<S>> dump_attention(const Tensor<S>& h_state, const QeParams<S>& p,
                                      int K);

#define RFDA_DSTA_DECL(S)                                                               \
  extern template OffsetField<S> predict_attention_offsets(const Tensor<S>&,            \
                                                           const DstaParams<S>&, int); \
  extern template DstaOut<S> dsta_block_full(const Tensor<S>&, const DstaParams<S>&,    \
                                             int);                                      \
  extern template Tensor<S> dsta_block(const Tensor<S>&, const DstaParams<S>&, int);    \
  extern template Tensor<S> qe_forward(const Tensor<S>&, const Tensor<S>&,              \
                                       const QeParams<S>&, int);                        \
  extern template std::vector<Tensor<S>> dump_attention(const Tensor<S>&,               \
                                                        const QeParams<S>&, int);
RFDA_DSTA_DECL(float)
RFDA_DSTA_DECL(double)
#undef RFDA_DSTA_DECL

}  // namespace rfda
