#include "rfda/stdf.hpp"

#include <array>
#include <stdexcept>

namespace rfda {

namespace {

template <typename S>
void check_window(const Tensor<S>& window, const ModelConfig& cfg) {
  if (!window.valid() || window.ndim() != 3 || window.dim(0) != cfg.window())
    throw std::invalid_argument("stdf: window must be [2R+1,H,W] with R=" +
                                std::to_string(cfg.R));
  if (window.dim(1) % 4 != 0 || window.dim(2) % 4 != 0)
    throw std::invalid_argument("stdf: H and W must be divisible by 4");
}

}  // namespace

template <typename S>
OffsetField<S> predict_offsets(const Tensor<S>& window, const StdfParams<S>& p,
                               const ModelConfig& cfg) {
  check_window(window, cfg);
  const int H = window.dim(1), W = window.dim(2);

  Tensor<S> c0 = relu(conv2d(window, p.in_conv.w, p.in_conv.b, 1, 1));
  Tensor<S> e1 = relu(conv2d(c0, p.enc1a.w, p.enc1a.b, 2, 1));
  Tensor<S> c1 = relu(conv2d(e1, p.enc1b.w, p.enc1b.b, 1, 1));
  Tensor<S> e2 = relu(conv2d(c1, p.enc2a.w, p.enc2a.b, 2, 1));
  Tensor<S> c2 = relu(conv2d(e2, p.enc2b.w, p.enc2b.b, 1, 1));

  Tensor<S> u1 = upsample_bilinear(c2, 2);
  std::array<Tensor<S>, 2> s1{u1, c1};
  Tensor<S> d1 = relu(conv2d(concat_channels(std::span<const Tensor<S>>(s1)),
                             p.dec1.w, p.dec1.b, 1, 1));
  Tensor<S> u2 = upsample_bilinear(d1, 2);
  std::array<Tensor<S>, 2> s2{u2, c0};
  Tensor<S> d2 = relu(conv2d(concat_channels(std::span<const Tensor<S>>(s2)),
                             p.dec2.w, p.dec2.b, 1, 1));

  Tensor<S> raw = conv2d(d2, p.head.w, p.head.b, 1, 1);
  OffsetField<S> off;
  off.kernel = cfg.K;
  off.values = reshape(raw, {cfg.window(), 2 * cfg.K * cfg.K, H, W});
  return off;
}

template <typename S>
Tensor<S> fuse_frames(const Tensor<S>& window, const OffsetField<S>& offsets,
                      const StdfParams<S>& p) {
  if (offsets.groups() != window.dim(0))
    throw std::invalid_argument("stdf: need one offset group per frame, got " +
                                std::to_string(offsets.groups()));
  return deform_conv2d(window, offsets, p.fusion.w, p.fusion.b);
}

template <typename S>
Tensor<S> stdf_forward(const Tensor<S>& window, const StdfParams<S>& p,
                       const ModelConfig& cfg) {
  return fuse_frames(window, predict_offsets(window, p, cfg), p);
}

#define RFDA_STDF_DEF(S)                                                     \
  template OffsetField<S> predict_offsets(const Tensor<S>&,                  \
                                          const StdfParams<S>&,              \
                                          const ModelConfig&);               \
  template Tensor<S> fuse_frames(const Tensor<S>&, const OffsetField<S>&,    \
                                 const StdfParams<S>&);                      \
  template Tensor<S> stdf_forward(const Tensor<S>&, const StdfParams<S>&,    \
                                  const ModelConfig&);
RFDA_STDF_DEF(float)
RFDA_STDF_DEF(double)
#undef RFDA_STDF_DEF

}  // namespace rfda
