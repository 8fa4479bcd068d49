#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfda/ops.hpp"
#include "rfda/tensor.hpp"

namespace rfda {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A sequence of single-channel [1,H,W] frames with values in [0,1].
template <typename S>
struct VideoClip {
  int width = 0, height = 0;
  std::vector<Tensor<S>> frames;
  int frame_count() const { return static_cast<int>(frames.size()); }
};

// Reads raw 8-bit planar video.  y_only: each frame is W*H luma bytes;
// otherwise 4:2:0 (frame stride W*H*3/2) with chroma skipped.  Values are
// normalized to v/255.
template <typename S>
VideoClip<S> read_y_raw(const std::string& path, int width, int height, bool y_only);

// Writes luma-only frames, byte = round(v*255) (half away from zero), via a
// temp file renamed into place on success.
template <typename S>
void write_y_raw(const VideoClip<S>& clip, const std::string& path);

// 8-bit grayscale PGM (P5, maxval 255) of one [H,W] or [1,H,W] plane.
template <typename S>
void write_pgm(const Tensor<S>& plane, const std::string& path);

// Whole-file text write through a temp file (reports, manifests).
void write_text_file(const std::string& path, const std::string& content);

// Blockwise 8x8 DCT quantization: scale to 8-bit range, level-shift, DCT-II,
// round to multiples of table*q/16, invert, clamp.  Frames are reflect-padded
// to multiples of 8 and cropped back.
template <typename S>
VideoClip<S> degrade_clip(const VideoClip<S>& clip, int q);

template <typename S>
VideoClip<S> degrade_clip(const VideoClip<S>& clip, int q,
                          const std::array<double, 64>& quant_table);

// The standard JPEG luminance quantization table (row-major 8x8).
const std::array<double, 64>& jpeg_luma_table();

// Mirror-pads the bottom/right edge (without repeating the border pixel) so
// both spatial extents become multiples of m; differentiable.
template <typename S>
Tensor<S> pad_reflect_to_multiple(const Tensor<S>& x, int m);

#define RFDA_VIDEO_DECL(S)                                                            \
  extern template VideoClip<S> read_y_raw(const std::string&, int, int, bool);        \
  extern template void write_y_raw(const VideoClip<S>&, const std::string&);          \
  extern template void write_pgm(const Tensor<S>&, const std::string&);               \
  extern template VideoClip<S> degrade_clip(const VideoClip<S>&, int);                \
  extern template VideoClip<S> degrade_clip(const VideoClip<S>&, int,                 \
                                            const std::array<double, 64>&);           \
  extern template Tensor<S> pad_reflect_to_multiple(const Tensor<S>&, int);
RFDA_VIDEO_DECL(float)
RFDA_VIDEO_DECL(double)
#undef RFDA_VIDEO_DECL

}  // namespace rfda
