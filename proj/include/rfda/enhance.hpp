#pragma once

#include <functional>

#include "rfda/model.hpp"
#include "rfda/video.hpp"

namespace rfda {

// Stacks the 2R+1 frames around index t (0-based) into [2R+1,H,W]; indices
// outside the sequence clamp to the first/last frame.
template <typename S>
Tensor<S> stack_window(const std::vector<Tensor<S>>& frames, int t, int R);

// Called once per (frame, attention block) with the block's spatial mask.
template <typename S>
using AttentionSink = std::function<void(int frame, int block, const Tensor<S>& mask)>;

// Streaming inference: per frame, fuse the window, advance the recurrent
// state (carried across the whole video), and apply the enhancement head.
// Frames are mirror-padded to multiples of 4 and cropped back.
template <typename S>
VideoClip<S> enhance_video(const VideoClip<S>& clip, const ModelParams<S>& params,
                           const AttentionSink<S>* dump = nullptr);

// Reference evaluation order: all fused features first, then the recurrence,
// then the head.  Must match enhance_video bit for bit.
template <typename S>
VideoClip<S> enhance_video_two_pass(const VideoClip<S>& clip, const ModelParams<S>& params);

#define RFDA_ENHANCE_DECL(S)                                                            \
  extern template Tensor<S> stack_window(const std::vector<Tensor<S>>&, int, int);      \
  extern template VideoClip<S> enhance_video(const VideoClip<S>&, const ModelParams<S>&, \
                                             const AttentionSink<S>*);                  \
  extern template VideoClip<S> enhance_video_two_pass(const VideoClip<S>&,              \
                                                      const ModelParams<S>&);
RFDA_ENHANCE_DECL(float)
RFDA_ENHANCE_DECL(double)
#undef RFDA_ENHANCE_DECL

}  // namespace rfda
