#pragma once

#include <span>

#include "rfda/tensor.hpp"

namespace rfda {

// All spatial ops take [C,H,W] activations (row-major) unless noted.  Every op
// validates shapes up front and throws std::invalid_argument on mismatch.
// When a GradTape is active and any input is tracked, the op records a
// backward closure; otherwise it is plain arithmetic.

// 2-d cross-correlation with zero padding.  x:[Ci,H,W] w:[Co,Ci,Kh,Kw] b:[Co].
template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                 int stride = 1, int pad = 0);

// Single bilinear read of plane x:[H,W] at fractional (row, col).  Taps that
// fall outside the plane contribute zero.  Returns a [1] tensor; gradients
// flow to both x and the continuous coordinates held in rc:[2].
template <typename S>
Tensor<S> bilinear_sample(const Tensor<S>& x, const Tensor<S>& rc);

// Per-pixel, per-tap sampling displacements for deform_conv2d.
// values:[G, 2*K*K, H, W]; channel 2k holds the row offset of tap k and
// channel 2k+1 its column offset, with taps enumerated row-major over the
// kernel window.  Input channel ci uses offset group ci / (Ci/G).
template <typename S>
struct OffsetField {
  Tensor<S> values;
  int kernel = 3;
  int groups() const { return values.dim(0); }
};

// Deformable 2-d convolution, stride 1, zero "same" padding via out-of-range
// taps reading zero.  x:[Ci,H,W] w:[Co,Ci,K,K] b:[Co], output [Co,H,W].
template <typename S>
Tensor<S> deform_conv2d(const Tensor<S>& x, const OffsetField<S>& off,
                        const Tensor<S>& w, const Tensor<S>& b);

// Average pooling over k*k windows with zero padding; padded taps count in
// the divisor (sum / k^2 regardless of position).
template <typename S>
Tensor<S> avg_pool2d(const Tensor<S>& x, int k, int stride, int pad);

// Bilinear upsampling by an integer factor with half-pixel source mapping and
// edge-clamped reads.
template <typename S>
Tensor<S> upsample_bilinear(const Tensor<S>& x, int factor);

template <typename S>
Tensor<S> relu(const Tensor<S>& x);

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& x);

// Elementwise; y may have singleton dims that broadcast against x (same rank).
template <typename S>
Tensor<S> add(const Tensor<S>& x, const Tensor<S>& y);

template <typename S>
Tensor<S> mul(const Tensor<S>& x, const Tensor<S>& y);

template <typename S>
Tensor<S> scale(const Tensor<S>& x, S s);

template <typename S>
Tensor<S> concat_channels(std::span<const Tensor<S>> xs);

template <typename S>
Tensor<S> slice_channels(const Tensor<S>& x, int from, int to);

template <typename S>
Tensor<S> crop_spatial(const Tensor<S>& x, int r0, int c0, int h, int w);

template <typename S>
Tensor<S> reshape(const Tensor<S>& x, Shape shape);

// x:[Di] w:[Do,Di] b:[Do] -> [Do].
template <typename S>
Tensor<S> fully_connected(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b);

// [C,H,W] -> [C] channel means.
template <typename S>
Tensor<S> global_avg_pool(const Tensor<S>& x);

// Sum of all elements -> [1].
template <typename S>
Tensor<S> sum_all(const Tensor<S>& x);

// Clamp to [0,1]; gradient passes only where the input is strictly inside.
template <typename S>
Tensor<S> clamp01(const Tensor<S>& x);

// Copy that blocks gradient flow.
template <typename S>
Tensor<S> detach(const Tensor<S>& x);

// mean over elements of sqrt((x - target)^2 + eps) -> [1].  target is a
// constant; gradients flow to x only.
template <typename S>
Tensor<S> charbonnier_loss(const Tensor<S>& x, const Tensor<S>& target, double eps);

#define RFDA_OPS_DECL(S)                                                                   \
  extern template Tensor<S> conv2d(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&,   \
                                   int, int);                                              \
  extern template Tensor<S> bilinear_sample(const Tensor<S>&, const Tensor<S>&);           \
  extern template Tensor<S> deform_conv2d(const Tensor<S>&, const OffsetField<S>&,         \
                                          const Tensor<S>&, const Tensor<S>&);             \
  extern template Tensor<S> avg_pool2d(const Tensor<S>&, int, int, int);                   \
  extern template Tensor<S> upsample_bilinear(const Tensor<S>&, int);                      \
  extern template Tensor<S> relu(const Tensor<S>&);                                        \
  extern template Tensor<S> sigmoid(const Tensor<S>&);                                     \
  extern template Tensor<S> add(const Tensor<S>&, const Tensor<S>&);                       \
  extern template Tensor<S> mul(const Tensor<S>&, const Tensor<S>&);                       \
  extern template Tensor<S> scale(const Tensor<S>&, S);                                    \
  extern template Tensor<S> concat_channels(std::span<const Tensor<S>>);                   \
  extern template Tensor<S> slice_channels(const Tensor<S>&, int, int);                    \
  extern template Tensor<S> crop_spatial(const Tensor<S>&, int, int, int, int);            \
  extern template Tensor<S> reshape(const Tensor<S>&, Shape);                              \
  extern template Tensor<S> fully_connected(const Tensor<S>&, const Tensor<S>&,            \
                                            const Tensor<S>&);                             \
  extern template Tensor<S> global_avg_pool(const Tensor<S>&);                             \
  extern template Tensor<S> sum_all(const Tensor<S>&);                                     \
  extern template Tensor<S> clamp01(const Tensor<S>&);                                     \
  extern template Tensor<S> detach(const Tensor<S>&);                                      \
  extern template Tensor<S> charbonnier_loss(const Tensor<S>&, const Tensor<S>&, double);
RFDA_OPS_DECL(float)
RFDA_OPS_DECL(double)
#undef RFDA_OPS_DECL

}  // namespace rfda
