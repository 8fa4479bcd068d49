#include "rfda/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfda {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

template <typename S>
inline void axpy(S* y, S a, const S* x, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

// Fixed-association 4-lane dot product: deterministic and fast without
// reassociation flags.
template <typename S>
inline S dotp(const S* a, const S* b, int n) {
  S s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  S s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// One bilinear read with zero outside the plane.  Records the surviving
// integer taps plus the value's derivative w.r.t. the continuous coordinates.
template <typename S>
struct Taps {
  S v, dr, dc;
  int idx[4];
  S wgt[4];
};

template <typename S>
inline void tap_at(const S* p, int H, int W, S r, S c, Taps<S>& t) {
  if (!(r > S(-1e6) && r < S(1e6) && c > S(-1e6) && c < S(1e6))) {
    t.v = t.dr = t.dc = 0;
    t.idx[0] = t.idx[1] = t.idx[2] = t.idx[3] = -1;
    return;
  }
  const S rf = std::floor(r), cf = std::floor(c);
  const int r0 = static_cast<int>(rf), c0 = static_cast<int>(cf);
  const S ar = r - rf, ac = c - cf;
  const bool rin0 = r0 >= 0 && r0 < H, rin1 = r0 + 1 >= 0 && r0 + 1 < H;
  const bool cin0 = c0 >= 0 && c0 < W, cin1 = c0 + 1 >= 0 && c0 + 1 < W;
  S v00 = 0, v01 = 0, v10 = 0, v11 = 0;
  t.idx[0] = t.idx[1] = t.idx[2] = t.idx[3] = -1;
  if (rin0 && cin0) { t.idx[0] = r0 * W + c0; v00 = p[t.idx[0]]; }
  if (rin0 && cin1) { t.idx[1] = r0 * W + c0 + 1; v01 = p[t.idx[1]]; }
  if (rin1 && cin0) { t.idx[2] = (r0 + 1) * W + c0; v10 = p[t.idx[2]]; }
  if (rin1 && cin1) { t.idx[3] = (r0 + 1) * W + c0 + 1; v11 = p[t.idx[3]]; }
  t.wgt[0] = (1 - ar) * (1 - ac);
  t.wgt[1] = (1 - ar) * ac;
  t.wgt[2] = ar * (1 - ac);
  t.wgt[3] = ar * ac;
  t.v = t.wgt[0] * v00 + t.wgt[1] * v01 + t.wgt[2] * v10 + t.wgt[3] * v11;
  t.dr = (v10 - v00) * (1 - ac) + (v11 - v01) * ac;
  t.dc = (v01 - v00) * (1 - ar) + (v11 - v10) * ar;
}

template <typename S>
S* grad_of(const Tensor<S>& t) {
  return t.requires_grad() ? const_cast<Tensor<S>&>(t).grad() : nullptr;
}

}  // namespace

template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                 int stride, int pad) {
  require(x.valid() && x.ndim() == 3, "conv2d: x must be [C,H,W]");
  require(w.valid() && w.ndim() == 4, "conv2d: w must be [Co,Ci,Kh,Kw]");
  require(b.valid() && b.ndim() == 1, "conv2d: b must be [Co]");
  const int Ci = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int Co = w.dim(0), Kh = w.dim(2), Kw = w.dim(3);
  require(w.dim(1) == Ci, "conv2d: w expects " + std::to_string(w.dim(1)) +
                              " input channels, x has " + std::to_string(Ci));
  require(b.dim(0) == Co, "conv2d: bias/filter count mismatch");
  require(stride >= 1 && pad >= 0, "conv2d: bad stride/pad");
  const int Ho = (H + 2 * pad - Kh) / stride + 1;
  const int Wo = (W + 2 * pad - Kw) / stride + 1;
  require(H + 2 * pad >= Kh && W + 2 * pad >= Kw, "conv2d: kernel larger than padded input");

  Tensor<S> out({Co, Ho, Wo});
  const S* xd = x.data();
  const S* wd = w.data();
  const S* bd = b.data();
  S* od = out.data();

  // Valid output-column range of each kernel column, hoisted out of the hot
  // loops.  Taps outside it would read padding and are skipped entirely.
  std::vector<int> lo_kw(static_cast<std::size_t>(Kw)), hi_kw(static_cast<std::size_t>(Kw));
  for (int kw = 0; kw < Kw; ++kw) {
    int lo, hi;
    if (stride == 1) {
      lo = std::max(0, pad - kw);
      hi = std::min(Wo, W + pad - kw);
    } else {
      const int num = pad - kw;
      lo = num <= 0 ? 0 : (num + stride - 1) / stride;
      const int m = W - 1 + pad - kw;
      hi = m < 0 ? 0 : std::min(Wo, m / stride + 1);
    }
    lo_kw[static_cast<std::size_t>(kw)] = lo;
    hi_kw[static_cast<std::size_t>(kw)] = std::max(lo, hi);
  }

  // Each output row accumulates in a scratch buffer the optimizer can prove
  // disjoint from the inputs, and is stored once at the end.  Per output
  // element the add order is bias, then ascending (ci, kh, kw), in every path.
  std::vector<S> accv(static_cast<std::size_t>(Wo) * 4);
  S* const __restrict acc = accv.data();

  if (stride == 1 && Kw == 3) {
    // Fused 3-tap stencil: one pass over the row per (ci, kh), boundary
    // columns peeled so skipped padding taps stay skipped.  Output channels
    // go four at a time so the three shifted input loads are shared; the
    // per-channel arithmetic is identical in the blocked and leftover paths.
    const int l0 = lo_kw[0], h0 = hi_kw[0], l1 = lo_kw[1], h1 = hi_kw[1],
              l2 = lo_kw[2], h2 = hi_kw[2];
    const int fl = std::min(Wo, std::max({l0, l1, l2}));
    const int fh = std::min({h0, h1, h2});
    S* const __restrict a0 = accv.data();
    S* const __restrict a1 = a0 + Wo;
    S* const __restrict a2 = a1 + Wo;
    S* const __restrict a3 = a2 + Wo;
    const std::size_t wstride_co = static_cast<std::size_t>(Ci) * Kh * Kw;
    auto edge_tap = [&](S* arow, S w0, S w1, S w2, const S* s0, int wo) {
      S v = arow[wo];
      if (wo >= l0 && wo < h0) v += w0 * s0[wo];
      if (wo >= l1 && wo < h1) v += w1 * s0[wo + 1];
      if (wo >= l2 && wo < h2) v += w2 * s0[wo + 2];
      arow[wo] = v;
    };
    int co = 0;
    for (; co + 4 <= Co; co += 4) {
      for (int ho = 0; ho < Ho; ++ho) {
        for (int wo = 0; wo < Wo; ++wo) a0[wo] = bd[co];
        for (int wo = 0; wo < Wo; ++wo) a1[wo] = bd[co + 1];
        for (int wo = 0; wo < Wo; ++wo) a2[wo] = bd[co + 2];
        for (int wo = 0; wo < Wo; ++wo) a3[wo] = bd[co + 3];
        const int hi0 = ho - pad;
        const int kh_lo = hi0 < 0 ? -hi0 : 0;
        const int kh_hi = std::min(Kh, H - hi0);
        for (int ci = 0; ci < Ci; ++ci) {
          const S* xbase = xd + static_cast<std::size_t>(ci) * H * W;
          const S* wr0 = wd + (static_cast<std::size_t>(co) * Ci + ci) * Kh * Kw;
          for (int kh = kh_lo; kh < kh_hi; ++kh) {
            const S* __restrict s0 = xbase + static_cast<std::size_t>(hi0 + kh) * W - pad;
            const S* w0r = wr0 + static_cast<std::size_t>(kh) * Kw;
            const S* w1r = w0r + wstride_co;
            const S* w2r = w1r + wstride_co;
            const S* w3r = w2r + wstride_co;
            const S w00 = w0r[0], w01 = w0r[1], w02 = w0r[2];
            const S w10 = w1r[0], w11 = w1r[1], w12 = w1r[2];
            const S w20 = w2r[0], w21 = w2r[1], w22 = w2r[2];
            const S w30 = w3r[0], w31 = w3r[1], w32 = w3r[2];
            int wo = 0;
            for (; wo < fl; ++wo) {
              edge_tap(a0, w00, w01, w02, s0, wo);
              edge_tap(a1, w10, w11, w12, s0, wo);
              edge_tap(a2, w20, w21, w22, s0, wo);
              edge_tap(a3, w30, w31, w32, s0, wo);
            }
            for (; wo < fh; ++wo) {
              const S x0 = s0[wo], x1 = s0[wo + 1], x2 = s0[wo + 2];
              a0[wo] = ((a0[wo] + w00 * x0) + w01 * x1) + w02 * x2;
              a1[wo] = ((a1[wo] + w10 * x0) + w11 * x1) + w12 * x2;
              a2[wo] = ((a2[wo] + w20 * x0) + w21 * x1) + w22 * x2;
              a3[wo] = ((a3[wo] + w30 * x0) + w31 * x1) + w32 * x2;
            }
            for (; wo < Wo; ++wo) {
              edge_tap(a0, w00, w01, w02, s0, wo);
              edge_tap(a1, w10, w11, w12, s0, wo);
              edge_tap(a2, w20, w21, w22, s0, wo);
              edge_tap(a3, w30, w31, w32, s0, wo);
            }
          }
        }
        S* orow = od + (static_cast<std::size_t>(co) * Ho + ho) * Wo;
        for (int wo = 0; wo < Wo; ++wo) orow[wo] = a0[wo];
        orow += static_cast<std::size_t>(Ho) * Wo;
        for (int wo = 0; wo < Wo; ++wo) orow[wo] = a1[wo];
        orow += static_cast<std::size_t>(Ho) * Wo;
        for (int wo = 0; wo < Wo; ++wo) orow[wo] = a2[wo];
        orow += static_cast<std::size_t>(Ho) * Wo;
        for (int wo = 0; wo < Wo; ++wo) orow[wo] = a3[wo];
      }
    }
    for (; co < Co; ++co) {
      const S bias = bd[co];
      for (int ho = 0; ho < Ho; ++ho) {
        for (int wo = 0; wo < Wo; ++wo) a0[wo] = bias;
        const int hi0 = ho - pad;
        const int kh_lo = hi0 < 0 ? -hi0 : 0;
        const int kh_hi = std::min(Kh, H - hi0);
        for (int ci = 0; ci < Ci; ++ci) {
          const S* xbase = xd + static_cast<std::size_t>(ci) * H * W;
          const S* wrow0 = wd + (static_cast<std::size_t>(co) * Ci + ci) * Kh * Kw;
          for (int kh = kh_lo; kh < kh_hi; ++kh) {
            const S* __restrict s0 = xbase + static_cast<std::size_t>(hi0 + kh) * W - pad;
            const S* wrow = wrow0 + static_cast<std::size_t>(kh) * Kw;
            const S w0 = wrow[0], w1 = wrow[1], w2 = wrow[2];
            int wo = 0;
            for (; wo < fl; ++wo) edge_tap(a0, w0, w1, w2, s0, wo);
            for (; wo < fh; ++wo)
              a0[wo] = ((a0[wo] + w0 * s0[wo]) + w1 * s0[wo + 1]) + w2 * s0[wo + 2];
            for (; wo < Wo; ++wo) edge_tap(a0, w0, w1, w2, s0, wo);
          }
        }
        S* orow = od + (static_cast<std::size_t>(co) * Ho + ho) * Wo;
        for (int wo = 0; wo < Wo; ++wo) orow[wo] = a0[wo];
      }
    }
  } else {
    for (int co = 0; co < Co; ++co) {
      const S bias = bd[co];
      for (int ho = 0; ho < Ho; ++ho) {
        for (int wo = 0; wo < Wo; ++wo) acc[wo] = bias;
        for (int ci = 0; ci < Ci; ++ci) {
          for (int kh = 0; kh < Kh; ++kh) {
            const int hi = ho * stride - pad + kh;
            if (hi < 0 || hi >= H) continue;
            const S* xrow = xd + (static_cast<std::size_t>(ci) * H + hi) * W;
            const S* wrow = wd + ((static_cast<std::size_t>(co) * Ci + ci) * Kh + kh) * Kw;
            if (stride == 1) {
              for (int kw = 0; kw < Kw; ++kw) {
                const S coeff = wrow[kw];
                const S* __restrict src = xrow - pad + kw;
                for (int wo = lo_kw[static_cast<std::size_t>(kw)];
                     wo < hi_kw[static_cast<std::size_t>(kw)]; ++wo)
                  acc[wo] += coeff * src[wo];
              }
            } else {
              for (int kw = 0; kw < Kw; ++kw) {
                const S coeff = wrow[kw];
                for (int wo = lo_kw[static_cast<std::size_t>(kw)];
                     wo < hi_kw[static_cast<std::size_t>(kw)]; ++wo)
                  acc[wo] += coeff * xrow[wo * stride - pad + kw];
              }
            }
          }
        }
        S* orow = od + (static_cast<std::size_t>(co) * Ho + ho) * Wo;
        for (int wo = 0; wo < Wo; ++wo) orow[wo] = acc[wo];
      }
    }
  }

  if (tracking(x, w, b)) {
    GradTape<S>::active()->record(out, [=]() {
      const S* god = out.grad();
      S* gx = grad_of(x);
      S* gw = grad_of(w);
      S* gb = grad_of(b);
      if (gb) {
        for (int co = 0; co < Co; ++co) {
          S acc = 0;
          const S* g = god + static_cast<std::size_t>(co) * Ho * Wo;
          for (int i = 0; i < Ho * Wo; ++i) acc += g[i];
          gb[co] += acc;
        }
      }
      if (!gx && !gw) return;
      const std::size_t wstride_co = static_cast<std::size_t>(Ci) * Kh * Kw;
      int co0 = 0;
      if (stride == 1) {
        // Four output channels share each input-row update and keep four
        // independent weight-gradient dot products in flight.
        for (; co0 + 4 <= Co; co0 += 4) {
          for (int ho = 0; ho < Ho; ++ho) {
            const S* g0 = god + (static_cast<std::size_t>(co0) * Ho + ho) * Wo;
            const S* g1 = g0 + static_cast<std::size_t>(Ho) * Wo;
            const S* g2 = g1 + static_cast<std::size_t>(Ho) * Wo;
            const S* g3 = g2 + static_cast<std::size_t>(Ho) * Wo;
            for (int ci = 0; ci < Ci; ++ci) {
              for (int kh = 0; kh < Kh; ++kh) {
                const int hi = ho - pad + kh;
                if (hi < 0 || hi >= H) continue;
                const S* xrow = xd + (static_cast<std::size_t>(ci) * H + hi) * W;
                S* gxrow = gx ? gx + (static_cast<std::size_t>(ci) * H + hi) * W : nullptr;
                const std::size_t woff =
                    ((static_cast<std::size_t>(co0) * Ci + ci) * Kh + kh) * Kw;
                const S* w0r = wd + woff;
                const S* w1r = w0r + wstride_co;
                const S* w2r = w1r + wstride_co;
                const S* w3r = w2r + wstride_co;
                for (int kw = 0; kw < Kw; ++kw) {
                  const int lo = lo_kw[static_cast<std::size_t>(kw)];
                  const int hi2 = hi_kw[static_cast<std::size_t>(kw)];
                  if (lo >= hi2) continue;
                  const int shift = kw - pad;
                  const int n = hi2 - lo;
                  if (gxrow) {
                    S* __restrict dst = gxrow + lo + shift;
                    const S* __restrict p0 = g0 + lo;
                    const S* __restrict p1 = g1 + lo;
                    const S* __restrict p2 = g2 + lo;
                    const S* __restrict p3 = g3 + lo;
                    const S c0 = w0r[kw], c1 = w1r[kw], c2 = w2r[kw], c3 = w3r[kw];
                    for (int i = 0; i < n; ++i)
                      dst[i] = (((dst[i] + c0 * p0[i]) + c1 * p1[i]) + c2 * p2[i]) + c3 * p3[i];
                  }
                  if (gw) {
                    S* gwr = gw + woff;
                    const S* xs = xrow + lo + shift;
                    gwr[kw] += dotp(g0 + lo, xs, n);
                    gwr[wstride_co + kw] += dotp(g1 + lo, xs, n);
                    gwr[2 * wstride_co + kw] += dotp(g2 + lo, xs, n);
                    gwr[3 * wstride_co + kw] += dotp(g3 + lo, xs, n);
                  }
                }
              }
            }
          }
        }
      }
      for (int co = co0; co < Co; ++co) {
        for (int ho = 0; ho < Ho; ++ho) {
          const S* grow = god + (static_cast<std::size_t>(co) * Ho + ho) * Wo;
          for (int ci = 0; ci < Ci; ++ci) {
            for (int kh = 0; kh < Kh; ++kh) {
              const int hi = ho * stride - pad + kh;
              if (hi < 0 || hi >= H) continue;
              const S* xrow = xd + (static_cast<std::size_t>(ci) * H + hi) * W;
              S* gxrow = gx ? gx + (static_cast<std::size_t>(ci) * H + hi) * W : nullptr;
              const S* wrow = wd + ((static_cast<std::size_t>(co) * Ci + ci) * Kh + kh) * Kw;
              S* gwrow = gw ? gw + ((static_cast<std::size_t>(co) * Ci + ci) * Kh + kh) * Kw : nullptr;
              for (int kw = 0; kw < Kw; ++kw) {
                const int lo = lo_kw[static_cast<std::size_t>(kw)];
                const int hi2 = hi_kw[static_cast<std::size_t>(kw)];
                if (lo >= hi2) continue;
                if (stride == 1) {
                  const int shift = kw - pad;
                  if (gxrow) axpy(gxrow + lo + shift, wrow[kw], grow + lo, hi2 - lo);
                  if (gwrow) gwrow[kw] += dotp(grow + lo, xrow + lo + shift, hi2 - lo);
                } else {
                  S acc = 0;
                  for (int wo = lo; wo < hi2; ++wo) {
                    const int wi = wo * stride - pad + kw;
                    if (gxrow) gxrow[wi] += wrow[kw] * grow[wo];
                    acc += grow[wo] * xrow[wi];
                  }
                  if (gwrow) gwrow[kw] += acc;
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> bilinear_sample(const Tensor<S>& x, const Tensor<S>& rc) {
  require(x.valid() && x.ndim() == 2, "bilinear_sample: x must be [H,W]");
  require(rc.valid() && rc.numel() == 2, "bilinear_sample: rc must hold (row,col)");
  const int H = x.dim(0), W = x.dim(1);
  Taps<S> t;
  tap_at(x.data(), H, W, rc.at(0), rc.at(1), t);
  Tensor<S> out = Tensor<S>::scalar(t.v);
  if (tracking(x, rc)) {
    GradTape<S>::active()->record(out, [=]() {
      const S g = out.grad()[0];
      if (S* gx = grad_of(x)) {
        for (int j = 0; j < 4; ++j)
          if (t.idx[j] >= 0) gx[t.idx[j]] += g * t.wgt[j];
      }
      if (S* grc = grad_of(rc)) {
        grc[0] += g * t.dr;
        grc[1] += g * t.dc;
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> deform_conv2d(const Tensor<S>& x, const OffsetField<S>& off,
                        const Tensor<S>& w, const Tensor<S>& b) {
  require(x.valid() && x.ndim() == 3, "deform_conv2d: x must be [C,H,W]");
  const Tensor<S>& ov = off.values;
  require(ov.valid() && ov.ndim() == 4, "deform_conv2d: offsets must be [G,2KK,H,W]");
  const int K = off.kernel;
  require(K >= 1 && K % 2 == 1, "deform_conv2d: kernel must be odd");
  const int Ci = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int G = ov.dim(0);
  require(ov.dim(1) == 2 * K * K, "deform_conv2d: offset field has " +
                                      std::to_string(ov.dim(1)) + " channels, expected " +
                                      std::to_string(2 * K * K));
  require(ov.dim(2) == H && ov.dim(3) == W, "deform_conv2d: offset/input spatial mismatch");
  require(G >= 1 && Ci % G == 0, "deform_conv2d: channels not divisible into offset groups");
  require(w.valid() && w.ndim() == 4 && w.dim(1) == Ci && w.dim(2) == K && w.dim(3) == K,
          "deform_conv2d: w must be [Co,Ci,K,K]");
  const int Co = w.dim(0);
  require(b.valid() && b.ndim() == 1 && b.dim(0) == Co, "deform_conv2d: bias/filter mismatch");

  const int HW = H * W, KK = K * K, CK = Ci * KK, cpg = Ci / G, ctr = (K - 1) / 2;
  Tensor<S> out({Co, H, W});
  const S* xd = x.data();
  const S* od_off = ov.data();
  const S* wd = w.data();
  const S* bd = b.data();
  S* outd = out.data();

  std::vector<S> smp(CK);
  Taps<S> t;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const int pix = r * W + c;
      for (int ci = 0; ci < Ci; ++ci) {
        const S* plane = xd + static_cast<std::size_t>(ci) * HW;
        const S* ob = od_off + (static_cast<std::size_t>(ci / cpg) * 2 * KK) * HW + pix;
        S* dst = smp.data() + ci * KK;
        for (int k = 0; k < KK; ++k) {
          const S sr = S(r + k / K - ctr) + ob[static_cast<std::size_t>(2 * k) * HW];
          const S sc = S(c + k % K - ctr) + ob[static_cast<std::size_t>(2 * k + 1) * HW];
          tap_at(plane, H, W, sr, sc, t);
          dst[k] = t.v;
        }
      }
      for (int co = 0; co < Co; ++co)
        outd[static_cast<std::size_t>(co) * HW + pix] =
            bd[co] + dotp(wd + static_cast<std::size_t>(co) * CK, smp.data(), CK);
    }
  }

  if (tracking(x, ov, w, b)) {
    GradTape<S>::active()->record(out, [=]() {
      const S* god = out.grad();
      S* gx = grad_of(x);
      S* goff = grad_of(ov);
      S* gw = grad_of(w);
      S* gb = grad_of(b);
      std::vector<S> wT(static_cast<std::size_t>(CK) * Co);
      for (int co = 0; co < Co; ++co)
        for (int j = 0; j < CK; ++j)
          wT[static_cast<std::size_t>(j) * Co + co] = wd[static_cast<std::size_t>(co) * CK + j];
      std::vector<S> go(Co), sm(CK);
      std::vector<Taps<S>> taps(CK);
      for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
          const int pix = r * W + c;
          for (int co = 0; co < Co; ++co) go[co] = god[static_cast<std::size_t>(co) * HW + pix];
          if (gb)
            for (int co = 0; co < Co; ++co) gb[co] += go[co];
          for (int ci = 0; ci < Ci; ++ci) {
            const S* plane = xd + static_cast<std::size_t>(ci) * HW;
            const S* ob = od_off + (static_cast<std::size_t>(ci / cpg) * 2 * KK) * HW + pix;
            for (int k = 0; k < KK; ++k) {
              const S sr = S(r + k / K - ctr) + ob[static_cast<std::size_t>(2 * k) * HW];
              const S sc = S(c + k % K - ctr) + ob[static_cast<std::size_t>(2 * k + 1) * HW];
              tap_at(plane, H, W, sr, sc, taps[ci * KK + k]);
              sm[ci * KK + k] = taps[ci * KK + k].v;
            }
          }
          if (gw)
            for (int co = 0; co < Co; ++co)
              axpy(gw + static_cast<std::size_t>(co) * CK, go[co], sm.data(), CK);
          if (gx || goff) {
            for (int ci = 0; ci < Ci; ++ci) {
              S* gplane = gx ? gx + static_cast<std::size_t>(ci) * HW : nullptr;
              S* gob = goff ? goff + (static_cast<std::size_t>(ci / cpg) * 2 * KK) * HW + pix
                            : nullptr;
              for (int k = 0; k < KK; ++k) {
                const int j = ci * KK + k;
                const S ds = dotp(go.data(), wT.data() + static_cast<std::size_t>(j) * Co, Co);
                const Taps<S>& tp = taps[j];
                if (gplane) {
                  for (int q = 0; q < 4; ++q)
                    if (tp.idx[q] >= 0) gplane[tp.idx[q]] += ds * tp.wgt[q];
                }
                if (gob) {
                  gob[static_cast<std::size_t>(2 * k) * HW] += ds * tp.dr;
                  gob[static_cast<std::size_t>(2 * k + 1) * HW] += ds * tp.dc;
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> avg_pool2d(const Tensor<S>& x, int k, int stride, int pad) {
  require(x.valid() && x.ndim() == 3, "avg_pool2d: x must be [C,H,W]");
  require(k >= 1 && stride >= 1 && pad >= 0, "avg_pool2d: bad window/stride/pad");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int Ho = (H + 2 * pad - k) / stride + 1;
  const int Wo = (W + 2 * pad - k) / stride + 1;
  require(H + 2 * pad >= k && W + 2 * pad >= k, "avg_pool2d: window larger than padded input");
  const S inv = S(1) / S(k * k);
  Tensor<S> out({C, Ho, Wo});
  const S* xd = x.data();
  S* od = out.data();
  for (int c = 0; c < C; ++c) {
    const S* plane = xd + static_cast<std::size_t>(c) * H * W;
    for (int ho = 0; ho < Ho; ++ho) {
      for (int wo = 0; wo < Wo; ++wo) {
        S acc = 0;
        for (int kr = 0; kr < k; ++kr) {
          const int r = ho * stride - pad + kr;
          if (r < 0 || r >= H) continue;
          const int c0 = wo * stride - pad;
          const int lo = std::max(0, c0), hi = std::min(W, c0 + k);
          const S* row = plane + static_cast<std::size_t>(r) * W;
          for (int cc = lo; cc < hi; ++cc) acc += row[cc];
        }
        od[(static_cast<std::size_t>(c) * Ho + ho) * Wo + wo] = acc * inv;
      }
    }
  }
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      for (int c = 0; c < C; ++c) {
        S* gplane = gx + static_cast<std::size_t>(c) * H * W;
        for (int ho = 0; ho < Ho; ++ho) {
          for (int wo = 0; wo < Wo; ++wo) {
            const S g = god[(static_cast<std::size_t>(c) * Ho + ho) * Wo + wo] * inv;
            for (int kr = 0; kr < k; ++kr) {
              const int r = ho * stride - pad + kr;
              if (r < 0 || r >= H) continue;
              const int c0 = wo * stride - pad;
              const int lo = std::max(0, c0), hi = std::min(W, c0 + k);
              S* row = gplane + static_cast<std::size_t>(r) * W;
              for (int cc = lo; cc < hi; ++cc) row[cc] += g;
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> upsample_bilinear(const Tensor<S>& x, int factor) {
  require(x.valid() && x.ndim() == 3, "upsample_bilinear: x must be [C,H,W]");
  require(factor >= 1, "upsample_bilinear: factor must be >= 1");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int Ho = H * factor, Wo = W * factor;

  // Half-pixel source mapping with edge-clamped taps, precomputed per axis.
  auto axis_map = [&](int n, int no, std::vector<int>& i0, std::vector<int>& i1,
                      std::vector<S>& a) {
    i0.resize(no);
    i1.resize(no);
    a.resize(no);
    for (int i = 0; i < no; ++i) {
      const double s = (i + 0.5) / factor - 0.5;
      if (s <= 0) {
        i0[i] = i1[i] = 0;
        a[i] = 0;
      } else if (s >= n - 1) {
        i0[i] = i1[i] = n - 1;
        a[i] = 0;
      } else {
        const double f = std::floor(s);
        i0[i] = static_cast<int>(f);
        i1[i] = i0[i] + 1;
        a[i] = static_cast<S>(s - f);
      }
    }
  };
  std::vector<int> r0, r1, c0, c1;
  std::vector<S> ar, ac;
  axis_map(H, Ho, r0, r1, ar);
  axis_map(W, Wo, c0, c1, ac);

  Tensor<S> out({C, Ho, Wo});
  const S* xd = x.data();
  S* od = out.data();
  for (int c = 0; c < C; ++c) {
    const S* plane = xd + static_cast<std::size_t>(c) * H * W;
    for (int ho = 0; ho < Ho; ++ho) {
      const S* rowa = plane + static_cast<std::size_t>(r0[ho]) * W;
      const S* rowb = plane + static_cast<std::size_t>(r1[ho]) * W;
      const S fr = ar[ho];
      S* orow = od + (static_cast<std::size_t>(c) * Ho + ho) * Wo;
      for (int wo = 0; wo < Wo; ++wo) {
        const S fc = ac[wo];
        const S top = rowa[c0[wo]] * (1 - fc) + rowa[c1[wo]] * fc;
        const S bot = rowb[c0[wo]] * (1 - fc) + rowb[c1[wo]] * fc;
        orow[wo] = top * (1 - fr) + bot * fr;
      }
    }
  }
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      for (int c = 0; c < C; ++c) {
        S* gplane = gx + static_cast<std::size_t>(c) * H * W;
        for (int ho = 0; ho < Ho; ++ho) {
          S* growa = gplane + static_cast<std::size_t>(r0[ho]) * W;
          S* growb = gplane + static_cast<std::size_t>(r1[ho]) * W;
          const S fr = ar[ho];
          const S* orow = god + (static_cast<std::size_t>(c) * Ho + ho) * Wo;
          for (int wo = 0; wo < Wo; ++wo) {
            const S g = orow[wo];
            const S fc = ac[wo];
            growa[c0[wo]] += g * (1 - fr) * (1 - fc);
            growa[c1[wo]] += g * (1 - fr) * fc;
            growb[c0[wo]] += g * fr * (1 - fc);
            growb[c1[wo]] += g * fr * fc;
          }
        }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> relu(const Tensor<S>& x) {
  require(x.valid(), "relu: empty tensor");
  Tensor<S> out(x.shape());
  const S* xd = x.data();
  S* od = out.data();
  const std::int64_t n = x.numel();
  for (std::int64_t i = 0; i < n; ++i) od[i] = xd[i] > 0 ? xd[i] : S(0);
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      for (std::int64_t i = 0; i < n; ++i)
        if (xd[i] > 0) gx[i] += god[i];
    });
  }
  return out;
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& x) {
  require(x.valid(), "sigmoid: empty tensor");
  Tensor<S> out(x.shape());
  const S* xd = x.data();
  S* od = out.data();
  const std::int64_t n = x.numel();
  for (std::int64_t i = 0; i < n; ++i) od[i] = S(1) / (S(1) + std::exp(-xd[i]));
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      for (std::int64_t i = 0; i < n; ++i) gx[i] += god[i] * od[i] * (S(1) - od[i]);
    });
  }
  return out;
}

namespace {

// Broadcast strides of y against x's shape; y dims must match or be 1.
template <typename S>
std::vector<std::int64_t> bcast_strides(const Tensor<S>& x, const Tensor<S>& y,
                                        const char* op) {
  require(x.ndim() == y.ndim(), std::string(op) + ": rank mismatch " + shape_str(x.shape()) +
                                    " vs " + shape_str(y.shape()));
  const int nd = x.ndim();
  std::vector<std::int64_t> stride(nd);
  std::int64_t s = 1;
  for (int d = nd - 1; d >= 0; --d) {
    stride[d] = y.dim(d) == 1 ? 0 : s;
    s *= y.dim(d);
  }
  for (int d = 0; d < nd; ++d) {
    require(y.dim(d) == x.dim(d) || y.dim(d) == 1,
            std::string(op) + ": cannot broadcast " + shape_str(y.shape()) + " to " +
                shape_str(x.shape()));
  }
  return stride;
}

// Walks x linearly while tracking the matching broadcast offset into y.
template <typename F>
void bcast_walk(const Shape& xs, const std::vector<std::int64_t>& ystr, F&& f) {
  const int nd = static_cast<int>(xs.size());
  std::vector<int> idx(nd, 0);
  std::int64_t n = 1;
  for (int d : xs) n *= d;
  std::int64_t yoff = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    f(i, yoff);
    for (int d = nd - 1; d >= 0; --d) {
      ++idx[d];
      yoff += ystr[d];
      if (idx[d] < xs[d]) break;
      yoff -= static_cast<std::int64_t>(xs[d]) * ystr[d];
      idx[d] = 0;
    }
  }
}

}  // namespace

template <typename S>
Tensor<S> add(const Tensor<S>& x, const Tensor<S>& y) {
  require(x.valid() && y.valid(), "add: empty tensor");
  Tensor<S> out(x.shape());
  const S* xd = x.data();
  const S* yd = y.data();
  S* od = out.data();
  const bool same = x.shape() == y.shape();
  if (same) {
    const std::int64_t n = x.numel();
    for (std::int64_t i = 0; i < n; ++i) od[i] = xd[i] + yd[i];
  } else {
    auto ystr = bcast_strides(x, y, "add");
    bcast_walk(x.shape(), ystr, [&](std::int64_t i, std::int64_t j) { od[i] = xd[i] + yd[j]; });
  }
  if (tracking(x, y)) {
    GradTape<S>::active()->record(out, [=]() {
      const S* god = out.grad();
      S* gx = grad_of(x);
      S* gy = grad_of(y);
      const std::int64_t n = x.numel();
      if (gx) {
        for (std::int64_t i = 0; i < n; ++i) gx[i] += god[i];
      }
      if (gy) {
        if (same) {
          for (std::int64_t i = 0; i < n; ++i) gy[i] += god[i];
        } else {
          auto ystr = bcast_strides(x, y, "add");
          bcast_walk(x.shape(), ystr,
                     [&](std::int64_t i, std::int64_t j) { gy[j] += god[i]; });
        }
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> mul(const Tensor<S>& x, const Tensor<S>& y) {
  require(x.valid() && y.valid(), "mul: empty tensor");
  Tensor<S> out(x.shape());
  const S* xd = x.data();
  const S* yd = y.data();
  S* od = out.data();
  const bool same = x.shape() == y.shape();
  if (same) {
    const std::int64_t n = x.numel();
    for (std::int64_t i = 0; i < n; ++i) od[i] = xd[i] * yd[i];
  } else {
    auto ystr = bcast_strides(x, y, "mul");
    bcast_walk(x.shape(), ystr, [&](std::int64_t i, std::int64_t j) { od[i] = xd[i] * yd[j]; });
  }
  if (tracking(x, y)) {
    GradTape<S>::active()->record(out, [=]() {
      const S* god = out.grad();
      S* gx = grad_of(x);
      S* gy = grad_of(y);
      const std::int64_t n = x.numel();
      if (same) {
        for (std::int64_t i = 0; i < n; ++i) {
          if (gx) gx[i] += god[i] * yd[i];
          if (gy) gy[i] += god[i] * xd[i];
        }
      } else {
        auto ystr = bcast_strides(x, y, "mul");
        bcast_walk(x.shape(), ystr, [&](std::int64_t i, std::int64_t j) {
          if (gx) gx[i] += god[i] * yd[j];
          if (gy) gy[j] += god[i] * xd[i];
        });
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> scale(const Tensor<S>& x, S s) {
  require(x.valid(), "scale: empty tensor");
  Tensor<S> out(x.shape());
  const S* xd = x.data();
  S* od = out.data();
  const std::int64_t n = x.numel();
  for (std::int64_t i = 0; i < n; ++i) od[i] = xd[i] * s;
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      for (std::int64_t i = 0; i < n; ++i) gx[i] += god[i] * s;
    });
  }
  return out;
}

template <typename S>
Tensor<S> concat_channels(std::span<const Tensor<S>> xs) {
  require(!xs.empty(), "concat_channels: no inputs");
  const int H = xs[0].dim(1), W = xs[0].dim(2);
  int C = 0;
  for (const Tensor<S>& t : xs) {
    require(t.valid() && t.ndim() == 3 && t.dim(1) == H && t.dim(2) == W,
            "concat_channels: inputs must be [C,H,W] with matching spatial size");
    C += t.dim(0);
  }
  Tensor<S> out({C, H, W});
  S* od = out.data();
  std::size_t at = 0;
  for (const Tensor<S>& t : xs) {
    std::memcpy(od + at, t.data(), sizeof(S) * t.numel());
    at += static_cast<std::size_t>(t.numel());
  }
  bool track = GradTape<S>::active() != nullptr;
  if (track) {
    bool any = false;
    for (const Tensor<S>& t : xs) any = any || t.requires_grad();
    track = any;
  }
  if (track) {
    std::vector<Tensor<S>> held(xs.begin(), xs.end());
    GradTape<S>::active()->record(out, [=]() {
      const S* god = out.grad();
      std::size_t pos = 0;
      for (const Tensor<S>& t : held) {
        const std::size_t n = static_cast<std::size_t>(t.numel());
        if (S* g = grad_of(t)) {
          for (std::size_t i = 0; i < n; ++i) g[i] += god[pos + i];
        }
        pos += n;
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> slice_channels(const Tensor<S>& x, int from, int to) {
  require(x.valid() && x.ndim() == 3, "slice_channels: x must be [C,H,W]");
  require(0 <= from && from < to && to <= x.dim(0), "slice_channels: bad range");
  const int H = x.dim(1), W = x.dim(2);
  const std::size_t HW = static_cast<std::size_t>(H) * W;
  Tensor<S> out({to - from, H, W});
  std::memcpy(out.data(), x.data() + from * HW, sizeof(S) * out.numel());
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      const std::size_t n = static_cast<std::size_t>(out.numel());
      S* base = gx + from * HW;
      for (std::size_t i = 0; i < n; ++i) base[i] += god[i];
    });
  }
  return out;
}

template <typename S>
Tensor<S> crop_spatial(const Tensor<S>& x, int r0, int c0, int h, int w) {
  require(x.valid() && x.ndim() == 3, "crop_spatial: x must be [C,H,W]");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  require(r0 >= 0 && c0 >= 0 && h >= 1 && w >= 1 && r0 + h <= H && c0 + w <= W,
          "crop_spatial: window outside input");
  Tensor<S> out({C, h, w});
  const S* xd = x.data();
  S* od = out.data();
  for (int c = 0; c < C; ++c)
    for (int r = 0; r < h; ++r)
      std::memcpy(od + (static_cast<std::size_t>(c) * h + r) * w,
                  xd + (static_cast<std::size_t>(c) * H + r0 + r) * W + c0, sizeof(S) * w);
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      for (int c = 0; c < C; ++c)
        for (int r = 0; r < h; ++r) {
          S* dst = gx + (static_cast<std::size_t>(c) * H + r0 + r) * W + c0;
          const S* src = god + (static_cast<std::size_t>(c) * h + r) * w;
          for (int i = 0; i < w; ++i) dst[i] += src[i];
        }
    });
  }
  return out;
}

template <typename S>
Tensor<S> reshape(const Tensor<S>& x, Shape shape) {
  require(x.valid(), "reshape: empty tensor");
  require(shape_numel(shape) == x.numel(), "reshape: element count mismatch " +
                                               shape_str(x.shape()) + " -> " + shape_str(shape));
  Tensor<S> out(std::move(shape), x.values());
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      const std::int64_t n = x.numel();
      for (std::int64_t i = 0; i < n; ++i) gx[i] += god[i];
    });
  }
  return out;
}

template <typename S>
Tensor<S> fully_connected(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
  require(x.valid() && x.ndim() == 1, "fully_connected: x must be [Di]");
  require(w.valid() && w.ndim() == 2 && w.dim(1) == x.dim(0),
          "fully_connected: w must be [Do,Di] matching x");
  require(b.valid() && b.ndim() == 1 && b.dim(0) == w.dim(0),
          "fully_connected: bias size mismatch");
  const int Di = x.dim(0), Do = w.dim(0);
  Tensor<S> out({Do});
  const S* xd = x.data();
  const S* wd = w.data();
  S* od = out.data();
  for (int o = 0; o < Do; ++o)
    od[o] = b.at(o) + dotp(wd + static_cast<std::size_t>(o) * Di, xd, Di);
  if (tracking(x, w, b)) {
    GradTape<S>::active()->record(out, [=]() {
      const S* god = out.grad();
      S* gx = grad_of(x);
      S* gw = grad_of(w);
      S* gb = grad_of(b);
      for (int o = 0; o < Do; ++o) {
        const S g = god[o];
        if (gb) gb[o] += g;
        if (gx) axpy(gx, g, wd + static_cast<std::size_t>(o) * Di, Di);
        if (gw) axpy(gw + static_cast<std::size_t>(o) * Di, g, xd, Di);
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> global_avg_pool(const Tensor<S>& x) {
  require(x.valid() && x.ndim() == 3, "global_avg_pool: x must be [C,H,W]");
  const int C = x.dim(0);
  const std::int64_t HW = static_cast<std::int64_t>(x.dim(1)) * x.dim(2);
  const S inv = S(1) / static_cast<S>(HW);
  Tensor<S> out({C});
  const S* xd = x.data();
  for (int c = 0; c < C; ++c) {
    S acc = 0;
    const S* p = xd + c * HW;
    for (std::int64_t i = 0; i < HW; ++i) acc += p[i];
    out.at(c) = acc * inv;
  }
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      for (int c = 0; c < C; ++c) {
        const S g = god[c] * inv;
        S* p = gx + c * HW;
        for (std::int64_t i = 0; i < HW; ++i) p[i] += g;
      }
    });
  }
  return out;
}

template <typename S>
Tensor<S> sum_all(const Tensor<S>& x) {
  require(x.valid(), "sum_all: empty tensor");
  const std::int64_t n = x.numel();
  const S* xd = x.data();
  S acc = 0;
  for (std::int64_t i = 0; i < n; ++i) acc += xd[i];
  Tensor<S> out = Tensor<S>::scalar(acc);
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S g = out.grad()[0];
      for (std::int64_t i = 0; i < n; ++i) gx[i] += g;
    });
  }
  return out;
}

template <typename S>
Tensor<S> clamp01(const Tensor<S>& x) {
  require(x.valid(), "clamp01: empty tensor");
  Tensor<S> out(x.shape());
  const S* xd = x.data();
  S* od = out.data();
  const std::int64_t n = x.numel();
  for (std::int64_t i = 0; i < n; ++i) od[i] = std::min(S(1), std::max(S(0), xd[i]));
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S* god = out.grad();
      for (std::int64_t i = 0; i < n; ++i)
        if (xd[i] > 0 && xd[i] < 1) gx[i] += god[i];
    });
  }
  return out;
}

template <typename S>
Tensor<S> detach(const Tensor<S>& x) {
  require(x.valid(), "detach: empty tensor");
  return x.clone();
}

template <typename S>
Tensor<S> charbonnier_loss(const Tensor<S>& x, const Tensor<S>& target, double eps) {
  require(x.valid() && target.valid(), "charbonnier_loss: empty tensor");
  require(x.shape() == target.shape(), "charbonnier_loss: shape mismatch " +
                                           shape_str(x.shape()) + " vs " +
                                           shape_str(target.shape()));
  require(eps > 0, "charbonnier_loss: eps must be positive");
  const std::int64_t n = x.numel();
  const S* xd = x.data();
  const S* td = target.data();
  double acc = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(xd[i]) - static_cast<double>(td[i]);
    acc += std::sqrt(d * d + eps);
  }
  Tensor<S> out = Tensor<S>::scalar(static_cast<S>(acc / static_cast<double>(n)));
  if (tracking(x)) {
    Tensor<S> tgt = target;  // keep target's storage alive for the replay
    GradTape<S>::active()->record(out, [=]() {
      S* gx = grad_of(x);
      if (!gx) return;
      const S g = out.grad()[0];
      const S invn = S(1) / static_cast<S>(n);
      const S* t = tgt.data();
      for (std::int64_t i = 0; i < n; ++i) {
        const S d = xd[i] - t[i];
        gx[i] += g * invn * d / std::sqrt(d * d + static_cast<S>(eps));
      }
    });
  }
  return out;
}

#define RFDA_OPS_DEF(S)                                                             \
  template Tensor<S> conv2d(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&,   \
                            int, int);                                              \
  template Tensor<S> bilinear_sample(const Tensor<S>&, const Tensor<S>&);           \
  template Tensor<S> deform_conv2d(const Tensor<S>&, const OffsetField<S>&,         \
                                   const Tensor<S>&, const Tensor<S>&);             \
  template Tensor<S> avg_pool2d(const Tensor<S>&, int, int, int);                   \
  template Tensor<S> upsample_bilinear(const Tensor<S>&, int);                      \
  template Tensor<S> relu(const Tensor<S>&);                                        \
  template Tensor<S> sigmoid(const Tensor<S>&);                                     \
  template Tensor<S> add(const Tensor<S>&, const Tensor<S>&);                       \
  template Tensor<S> mul(const Tensor<S>&, const Tensor<S>&);                       \
  template Tensor<S> scale(const Tensor<S>&, S);                                    \
  template Tensor<S> concat_channels(std::span<const Tensor<S>>);                   \
  template Tensor<S> slice_channels(const Tensor<S>&, int, int);                    \
  template Tensor<S> crop_spatial(const Tensor<S>&, int, int, int, int);            \
  template Tensor<S> reshape(const Tensor<S>&, Shape);                              \
  template Tensor<S> fully_connected(const Tensor<S>&, const Tensor<S>&,            \
                                     const Tensor<S>&);                             \
  template Tensor<S> global_avg_pool(const Tensor<S>&);                             \
  template Tensor<S> sum_all(const Tensor<S>&);                                     \
  template Tensor<S> clamp01(const Tensor<S>&);                                     \
  template Tensor<S> detach(const Tensor<S>&);                                      \
  template Tensor<S> charbonnier_loss(const Tensor<S>&, const Tensor<S>&, double);
RFDA_OPS_DEF(float)
RFDA_OPS_DEF(double)
#undef RFDA_OPS_DEF

}  // namespace rfda
