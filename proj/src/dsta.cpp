#include "rfda/dsta.hpp"

#include <stdexcept>

namespace rfda {

template <typename S>
OffsetField<S> predict_attention_offsets(const Tensor<S>& z, const DstaParams<S>& p,
                                         int K) {
  if (!z.valid() || z.ndim() != 3 || z.dim(1) < 2 || z.dim(2) < 2)
    throw std::invalid_argument("attention offsets: z must be [C,h,w] with h,w >= 2");
  const int h = z.dim(1), w = z.dim(2);
  Tensor<S> coarse = relu(conv2d(z, p.off_coarse1.w, p.off_coarse1.b, 2, 1));
  coarse = conv2d(coarse, p.off_coarse2.w, p.off_coarse2.b, 1, 1);
  coarse = upsample_bilinear(coarse, 2);
  if (coarse.dim(1) != h || coarse.dim(2) != w)
    coarse = crop_spatial(coarse, 0, 0, h, w);  // odd extents round up at stride 2
  Tensor<S> fine = conv2d(z, p.off_fine.w, p.off_fine.b, 1, 1);
  Tensor<S> raw = conv2d(add(coarse, fine), p.off_head.w, p.off_head.b, 1, 1);
  OffsetField<S> off;
  off.kernel = K;
  off.values = reshape(raw, {1, 2 * K * K, h, w});
  return off;
}

template <typename S>
DstaOut<S> dsta_block_full(const Tensor<S>& x, const DstaParams<S>& p, int K) {
  if (!x.valid() || x.ndim() != 3)
    throw std::invalid_argument("dsta_block: x must be [F,H,W]");
  const int F = x.dim(0), H = x.dim(1), W = x.dim(2);
  if (H % 4 != 0 || W % 4 != 0)
    throw std::invalid_argument("dsta_block: H and W must be divisible by 4");

  Tensor<S> z0 = relu(conv2d(x, p.reduce.w, p.reduce.b, 1, 0));
  Tensor<S> z1 = relu(conv2d(z0, p.down.w, p.down.b, 2, 1));
  Tensor<S> z2 = avg_pool2d(z1, 7, 2, 3);  // quarter resolution

  OffsetField<S> off = predict_attention_offsets(z2, p, K);
  Tensor<S> a = relu(deform_conv2d(z2, off, p.attn.w, p.attn.b));

  Tensor<S> up = upsample_bilinear(a, 4);
  Tensor<S> mask = sigmoid(conv2d(up, p.spatial.w, p.spatial.b, 1, 0));  // [1,H,W]

  Tensor<S> squeezed = global_avg_pool(a);
  Tensor<S> cw = sigmoid(fully_connected(relu(fully_connected(squeezed, p.fc1_w, p.fc1_b)),
                                         p.fc2_w, p.fc2_b));  // [F]

  Tensor<S> gated = mul(x, mask);
  Tensor<S> out = mul(gated, reshape(cw, {F, 1, 1}));
  return DstaOut<S>{out, mask, cw};
}

template <typename S>
Tensor<S> dsta_block(const Tensor<S>& x, const DstaParams<S>& p, int K) {
  return dsta_block_full(x, p, K).out;
}

template <typename S>
Tensor<S> qe_forward(const Tensor<S>& h_state, const Tensor<S>& target_frame,
                     const QeParams<S>& p, int K) {
  if (!h_state.valid() || h_state.ndim() != 3)
    throw std::invalid_argument("qe_forward: hidden state must be [F,H,W]");
  if (!target_frame.valid() || target_frame.ndim() != 3 || target_frame.dim(0) != 1 ||
      target_frame.dim(1) != h_state.dim(1) || target_frame.dim(2) != h_state.dim(2))
    throw std::invalid_argument("qe_forward: target frame must be [1,H,W] matching the state");
  if (p.blocks.size() != p.inter.size())
    throw std::invalid_argument("qe_forward: block/conv count mismatch");
  Tensor<S> y = conv2d(h_state, p.entry.w, p.entry.b, 1, 1);
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    y = dsta_block(y, p.blocks[i], K);
    y = relu(conv2d(y, p.inter[i].w, p.inter[i].b, 1, 1));
  }
  Tensor<S> residual = conv2d(y, p.exit.w, p.exit.b, 1, 1);
  return clamp01(add(target_frame, residual));
}

template <typename S>
std::vector<Tensor<S>> dump_attention(const Tensor<S>& h_state, const QeParams<S>& p,
                                      int K) {
  std::vector<Tensor<S>> masks;
  Tensor<S> y = conv2d(h_state, p.entry.w, p.entry.b, 1, 1);
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    DstaOut<S> o = dsta_block_full(y, p.blocks[i], K);
    masks.push_back(o.mask);
    y = relu(conv2d(o.out, p.inter[i].w, p.inter[i].b, 1, 1));
  }
  return masks;
}

#define RFDA_DSTA_DEF(S)                                                         \
  template OffsetField<S> predict_attention_offsets(const Tensor<S>&,            \
                                                    const DstaParams<S>&, int); \
  template DstaOut<S> dsta_block_full(const Tensor<S>&, const DstaParams<S>&,    \
                                      int);                                      \
  template Tensor<S> dsta_block(const Tensor<S>&, const DstaParams<S>&, int);    \
  template Tensor<S> qe_forward(const Tensor<S>&, const Tensor<S>&,              \
                                const QeParams<S>&, int);                        \
  template std::vector<Tensor<S>> dump_attention(const Tensor<S>&,               \
                                                 const QeParams<S>&, int);
RFDA_DSTA_DEF(float)
RFDA_DSTA_DEF(double)
#undef RFDA_DSTA_DEF

}  // namespace rfda
