#include "rfda/video.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace rfda {

namespace {

void commit_file(const std::string& tmp, const std::string& path) {
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move temp file into place at " + path);
  }
}

template <typename Fn>
void atomic_write(const std::string& path, Fn&& fill) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp + " for writing");
    fill(os);
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + path);
    }
  }
  commit_file(tmp, path);
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  atomic_write(path, [&](std::ofstream& os) { os.write(content.data(), content.size()); });
}

template <typename S>
VideoClip<S> read_y_raw(const std::string& path, int width, int height, bool y_only) {
  if (width <= 0 || height <= 0) throw IoError("read_y_raw: non-positive dimensions");
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) throw IoError("cannot open " + path);
  const std::int64_t size = static_cast<std::int64_t>(is.tellg());
  is.seekg(0);
  const std::int64_t luma = static_cast<std::int64_t>(width) * height;
  std::int64_t stride;
  if (y_only) {
    stride = luma;
  } else {
    if ((luma * 3) % 2 != 0 || width % 2 != 0 || height % 2 != 0)
      throw IoError("read_y_raw: 4:2:0 input needs even dimensions");
    stride = luma * 3 / 2;
  }
  if (size == 0 || size % stride != 0)
    throw IoError("read_y_raw: size of " + path + " (" + std::to_string(size) +
                  " bytes) is not a multiple of the " + std::to_string(stride) +
                  "-byte frame for " + std::to_string(width) + "x" + std::to_string(height) +
                  (y_only ? " luma-only" : " 4:2:0"));
  const int T = static_cast<int>(size / stride);
  VideoClip<S> clip;
  clip.width = width;
  clip.height = height;
  std::vector<unsigned char> buf(static_cast<std::size_t>(stride));
  for (int t = 0; t < T; ++t) {
    is.read(reinterpret_cast<char*>(buf.data()), stride);
    if (!is) throw IoError("read_y_raw: short read in " + path);
    Tensor<S> f({1, height, width});
    S* d = f.data();
    for (std::int64_t i = 0; i < luma; ++i) d[i] = static_cast<S>(buf[i]) / S(255);
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

template <typename S>
void write_y_raw(const VideoClip<S>& clip, const std::string& path) {
  if (clip.frames.empty()) throw IoError("write_y_raw: empty clip");
  atomic_write(path, [&](std::ofstream& os) {
    std::vector<unsigned char> buf;
    for (const Tensor<S>& f : clip.frames) {
      const std::int64_t n = f.numel();
      buf.resize(static_cast<std::size_t>(n));
      const S* d = f.data();
      for (std::int64_t i = 0; i < n; ++i) {
        long v = std::lround(static_cast<double>(d[i]) * 255.0);
        buf[static_cast<std::size_t>(i)] =
            static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
      }
      os.write(reinterpret_cast<const char*>(buf.data()), buf.size());
    }
  });
}

template <typename S>
void write_pgm(const Tensor<S>& plane, const std::string& path) {
  if (!plane.valid() || plane.ndim() < 2) throw IoError("write_pgm: plane must be [H,W]");
  const int H = plane.dim(plane.ndim() - 2), W = plane.dim(plane.ndim() - 1);
  if (plane.numel() != static_cast<std::int64_t>(H) * W)
    throw IoError("write_pgm: plane must be single-channel");
  atomic_write(path, [&](std::ofstream& os) {
    os << "P5\n" << W << ' ' << H << "\n255\n";
    const S* d = plane.data();
    std::vector<unsigned char> buf(static_cast<std::size_t>(H) * W);
    for (std::size_t i = 0; i < buf.size(); ++i) {
      long v = std::lround(static_cast<double>(d[i]) * 255.0);
      buf[i] = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
    }
    os.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  });
}

const std::array<double, 64>& jpeg_luma_table() {
  static const std::array<double, 64> t = {
      16, 11, 10, 16, 24,  40,  51,  61,  //
      12, 12, 14, 19, 26,  58,  60,  55,  //
      14, 13, 16, 24, 40,  57,  69,  56,  //
      14, 17, 22, 29, 51,  87,  80,  62,  //
      18, 22, 37, 56, 68,  109, 103, 77,  //
      24, 35, 55, 64, 81,  104, 113, 92,  //
      49, 64, 78, 87, 103, 121, 120, 101, //
      72, 92, 95, 98, 112, 100, 103, 99};
  return t;
}

namespace {

// Orthonormal 8-point DCT-II basis.
const std::array<double, 64>& dct_basis() {
  static const std::array<double, 64> m = [] {
    std::array<double, 64> b{};
    const double pi = std::acos(-1.0);
    for (int k = 0; k < 8; ++k) {
      const double s = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) b[k * 8 + n] = s * std::cos(pi * (2 * n + 1) * k / 16.0);
    }
    return b;
  }();
  return m;
}

int reflect_index(int i, int n) {
  // bottom/right mirror without repeating the border pixel
  return i < n ? i : 2 * n - 2 - i;
}

template <typename S>
S* mutable_grad(const Tensor<S>& t) {
  return t.requires_grad() ? const_cast<Tensor<S>&>(t).grad() : nullptr;
}

}  // namespace

template <typename S>
VideoClip<S> degrade_clip(const VideoClip<S>& clip, int q,
                          const std::array<double, 64>& quant_table) {
  if (q < 1) throw std::invalid_argument("degrade: q must be >= 1");
  if (clip.frames.empty()) throw std::invalid_argument("degrade: empty clip");
  const int H = clip.height, W = clip.width;
  for (const Tensor<S>& f : clip.frames)
    if (!f.valid() || f.ndim() < 2 || f.dim(f.ndim() - 2) != H || f.dim(f.ndim() - 1) != W ||
        f.numel() != static_cast<std::int64_t>(H) * W)
      throw std::invalid_argument("degrade: frame shape does not match clip dimensions");
  const int Hp = (H + 7) / 8 * 8, Wp = (W + 7) / 8 * 8;
  if (Hp - H > H - 1 || Wp - W > W - 1)
    throw std::invalid_argument("degrade: frame too small to pad to a block multiple");
  const std::array<double, 64>& M = dct_basis();
  std::array<double, 64> qstep;
  for (int i = 0; i < 64; ++i) qstep[i] = quant_table[i] * q / 16.0;

  VideoClip<S> out;
  out.width = W;
  out.height = H;
  std::vector<double> plane(static_cast<std::size_t>(Hp) * Wp);
  for (const Tensor<S>& f : clip.frames) {
    const S* src = f.data();
    for (int r = 0; r < Hp; ++r) {
      const int sr = reflect_index(r, H);
      for (int c = 0; c < Wp; ++c)
        plane[static_cast<std::size_t>(r) * Wp + c] =
            static_cast<double>(src[static_cast<std::size_t>(sr) * W + reflect_index(c, W)]) *
                255.0 -
            128.0;
    }
    double blk[64], tmp[64];
    for (int br = 0; br < Hp; br += 8) {
      for (int bc = 0; bc < Wp; bc += 8) {
        for (int r = 0; r < 8; ++r)
          for (int c = 0; c < 8; ++c)
            blk[r * 8 + c] = plane[static_cast<std::size_t>(br + r) * Wp + bc + c];
        // coeffs = M * blk * M^T
        for (int r = 0; r < 8; ++r)
          for (int c = 0; c < 8; ++c) {
            double a = 0;
            for (int k = 0; k < 8; ++k) a += M[r * 8 + k] * blk[k * 8 + c];
            tmp[r * 8 + c] = a;
          }
        for (int r = 0; r < 8; ++r)
          for (int c = 0; c < 8; ++c) {
            double a = 0;
            for (int k = 0; k < 8; ++k) a += tmp[r * 8 + k] * M[c * 8 + k];
            blk[r * 8 + c] = std::round(a / qstep[r * 8 + c]) * qstep[r * 8 + c];
          }
        // block = M^T * coeffs * M
        for (int r = 0; r < 8; ++r)
          for (int c = 0; c < 8; ++c) {
            double a = 0;
            for (int k = 0; k < 8; ++k) a += M[k * 8 + r] * blk[k * 8 + c];
            tmp[r * 8 + c] = a;
          }
        for (int r = 0; r < 8; ++r)
          for (int c = 0; c < 8; ++c) {
            double a = 0;
            for (int k = 0; k < 8; ++k) a += tmp[r * 8 + k] * M[k * 8 + c];
            plane[static_cast<std::size_t>(br + r) * Wp + bc + c] = a;
          }
      }
    }
    Tensor<S> g({1, H, W});
    S* dst = g.data();
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) {
        const double v = (plane[static_cast<std::size_t>(r) * Wp + c] + 128.0) / 255.0;
        dst[static_cast<std::size_t>(r) * W + c] =
            static_cast<S>(v < 0 ? 0 : (v > 1 ? 1 : v));
      }
    out.frames.push_back(std::move(g));
  }
  return out;
}

template <typename S>
VideoClip<S> degrade_clip(const VideoClip<S>& clip, int q) {
  return degrade_clip(clip, q, jpeg_luma_table());
}

template <typename S>
Tensor<S> pad_reflect_to_multiple(const Tensor<S>& x, int m) {
  if (!x.valid() || x.ndim() != 3) throw std::invalid_argument("pad: x must be [C,H,W]");
  if (m < 1) throw std::invalid_argument("pad: multiple must be >= 1");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int Hp = (H + m - 1) / m * m, Wp = (W + m - 1) / m * m;
  if (Hp == H && Wp == W) return x;
  if (Hp - H > H - 1 || Wp - W > W - 1)
    throw std::invalid_argument("pad: input too small to mirror to a multiple of " +
                                std::to_string(m));
  Tensor<S> out({C, Hp, Wp});
  const S* xd = x.data();
  S* od = out.data();
  for (int c = 0; c < C; ++c)
    for (int r = 0; r < Hp; ++r) {
      const S* srow = xd + (static_cast<std::size_t>(c) * H + reflect_index(r, H)) * W;
      S* drow = od + (static_cast<std::size_t>(c) * Hp + r) * Wp;
      for (int cc = 0; cc < Wp; ++cc) drow[cc] = srow[reflect_index(cc, W)];
    }
  if (tracking(x)) {
    GradTape<S>::active()->record(out, [=]() {
      S* gx = mutable_grad(x);
      if (!gx) return;
      const S* god = out.grad();
      for (int c = 0; c < C; ++c)
        for (int r = 0; r < Hp; ++r) {
          S* grow = gx + (static_cast<std::size_t>(c) * H + reflect_index(r, H)) * W;
          const S* srow = god + (static_cast<std::size_t>(c) * Hp + r) * Wp;
          for (int cc = 0; cc < Wp; ++cc) grow[reflect_index(cc, W)] += srow[cc];
        }
    });
  }
  return out;
}

#define RFDA_VIDEO_DEF(S)                                                     \
  template VideoClip<S> read_y_raw(const std::string&, int, int, bool);       \
  template void write_y_raw(const VideoClip<S>&, const std::string&);         \
  template void write_pgm(const Tensor<S>&, const std::string&);              \
  template VideoClip<S> degrade_clip(const VideoClip<S>&, int);               \
  template VideoClip<S> degrade_clip(const VideoClip<S>&, int,                \
                                     const std::array<double, 64>&);          \
  template Tensor<S> pad_reflect_to_multiple(const Tensor<S>&, int);
RFDA_VIDEO_DEF(float)
RFDA_VIDEO_DEF(double)
#undef RFDA_VIDEO_DEF

}  // namespace rfda
