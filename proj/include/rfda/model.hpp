#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfda/tensor.hpp"

namespace rfda {

struct ModelConfig {
  int R = 3;          // temporal radius: window holds 2R+1 frames
  int F = 64;         // fused-feature channels
  int K = 3;          // deformable kernel size
  int L = 2;          // attention block count in the enhancement head
  double beta = 0.2;  // recurrent residual scale
  std::string preset = "standard";

  static ModelConfig standard();
  static ModelConfig tiny();
  static std::optional<ModelConfig> by_name(const std::string& name);

  int window() const { return 2 * R + 1; }
  void validate() const;  // throws std::invalid_argument
  bool operator==(const ModelConfig& o) const;
};

template <typename S>
struct ConvLayer {
  Tensor<S> w, b;
};

// Offset-predicting U-Net over the frame window plus the grouped deformable
// fusion that produces the per-frame feature map.
template <typename S>
struct StdfParams {
  ConvLayer<S> in_conv;        // 2R+1 -> 32, 3x3
  ConvLayer<S> enc1a, enc1b;   // 32 -> 32: stride-2 3x3, then 3x3
  ConvLayer<S> enc2a, enc2b;
  ConvLayer<S> dec1, dec2;     // 64 -> 32 after skip concat
  ConvLayer<S> head;           // 32 -> (2R+1)*2K*K, zero-initialized
  ConvLayer<S> fusion;         // deformable fuse: w [F, 2R+1, K, K]
};

// Recurrent refinement: per-channel alignment of the previous hidden state
// and a two-conv residual extractor.
template <typename S>
struct RfParams {
  ConvLayer<S> off1;  // 2F -> F, 3x3, relu
  ConvLayer<S> off2;  // F -> 2F, 3x3, zero-initialized
  ConvLayer<S> mix;   // 1x1 channel mix [F,F,1,1], identity-initialized
  ConvLayer<S> fe1;   // 2F -> F, 3x3, relu
  ConvLayer<S> fe2;   // F -> F, 3x3, zero-initialized
};

template <typename S>
struct DstaParams {
  ConvLayer<S> reduce;       // 1x1 F -> F/4
  ConvLayer<S> down;         // 3x3 stride 2, F/4 -> F/4
  ConvLayer<S> off_coarse1;  // 3x3 stride 2, relu
  ConvLayer<S> off_coarse2;  // 3x3
  ConvLayer<S> off_fine;     // 3x3
  ConvLayer<S> off_head;     // 3x3 F/4 -> 2K*K, zero-initialized
  ConvLayer<S> attn;         // deformable 3x3 F/4 -> F/4
  ConvLayer<S> spatial;      // 1x1 F/4 -> 1
  Tensor<S> fc1_w, fc1_b;    // F/4 -> F/16
  Tensor<S> fc2_w, fc2_b;    // F/16 -> F
};

template <typename S>
struct QeParams {
  ConvLayer<S> entry;                 // F -> F
  std::vector<DstaParams<S>> blocks;  // L attention blocks
  std::vector<ConvLayer<S>> inter;    // L interleave convs, relu
  ConvLayer<S> exit;                  // F -> 1, zero-initialized
};

template <typename S>
struct ModelParams {
  ModelConfig config;
  StdfParams<S> stdf;
  QeParams<S> qe;
  std::optional<RfParams<S>> rf;  // absent during stage-1 training

  bool has_rf() const { return rf.has_value(); }
};

enum class ParamGroup { Stdf, Rf, Qe };

// Initializes a parameter set: He-normal conv/FC weights, zero biases, and
// zero-initialized offset/residual heads so offsets start at 0 and the
// recurrent/enhancement residuals start as identities.
template <typename S>
ModelParams<S> init_params(const ModelConfig& cfg, std::uint64_t seed, bool with_rf);

// Fills (or refreshes) just the recurrent-fusion block, for promoting
// stage-1 weights to a stage-2 model.
template <typename S>
RfParams<S> init_rf_params(const ModelConfig& cfg, std::uint64_t seed);

template <typename S>
ModelParams<double> params_to_double(const ModelParams<S>& p);

// Enumerates every learnable tensor in a stable order.
template <typename S, typename Fn>
void visit_params(ModelParams<S>& p, Fn&& fn) {
  auto layer = [&](const std::string& n, ConvLayer<S>& l, ParamGroup g) {
    fn(n + ".w", l.w, g);
    fn(n + ".b", l.b, g);
  };
  layer("stdf.in_conv", p.stdf.in_conv, ParamGroup::Stdf);
  layer("stdf.enc1a", p.stdf.enc1a, ParamGroup::Stdf);
  layer("stdf.enc1b", p.stdf.enc1b, ParamGroup::Stdf);
  layer("stdf.enc2a", p.stdf.enc2a, ParamGroup::Stdf);
  layer("stdf.enc2b", p.stdf.enc2b, ParamGroup::Stdf);
  layer("stdf.dec1", p.stdf.dec1, ParamGroup::Stdf);
  layer("stdf.dec2", p.stdf.dec2, ParamGroup::Stdf);
  layer("stdf.head", p.stdf.head, ParamGroup::Stdf);
  layer("stdf.fusion", p.stdf.fusion, ParamGroup::Stdf);
  if (p.rf) {
    layer("rf.off1", p.rf->off1, ParamGroup::Rf);
    layer("rf.off2", p.rf->off2, ParamGroup::Rf);
    layer("rf.mix", p.rf->mix, ParamGroup::Rf);
    layer("rf.fe1", p.rf->fe1, ParamGroup::Rf);
    layer("rf.fe2", p.rf->fe2, ParamGroup::Rf);
  }
  layer("qe.entry", p.qe.entry, ParamGroup::Qe);
  for (std::size_t i = 0; i < p.qe.blocks.size(); ++i) {
    const std::string bn = "qe.block" + std::to_string(i);
    DstaParams<S>& d = p.qe.blocks[i];
    layer(bn + ".reduce", d.reduce, ParamGroup::Qe);
    layer(bn + ".down", d.down, ParamGroup::Qe);
    layer(bn + ".off_coarse1", d.off_coarse1, ParamGroup::Qe);
    layer(bn + ".off_coarse2", d.off_coarse2, ParamGroup::Qe);
    layer(bn + ".off_fine", d.off_fine, ParamGroup::Qe);
    layer(bn + ".off_head", d.off_head, ParamGroup::Qe);
    layer(bn + ".attn", d.attn, ParamGroup::Qe);
    layer(bn + ".spatial", d.spatial, ParamGroup::Qe);
    fn(bn + ".fc1.w", d.fc1_w, ParamGroup::Qe);
    fn(bn + ".fc1.b", d.fc1_b, ParamGroup::Qe);
    fn(bn + ".fc2.w", d.fc2_w, ParamGroup::Qe);
    fn(bn + ".fc2.b", d.fc2_b, ParamGroup::Qe);
  }
  for (std::size_t i = 0; i < p.qe.inter.size(); ++i)
    layer("qe.inter" + std::to_string(i), p.qe.inter[i], ParamGroup::Qe);
  layer("qe.exit", p.qe.exit, ParamGroup::Qe);
}

template <typename S>
std::vector<std::string> param_names(ModelParams<S>& p);

extern template ModelParams<float> init_params(const ModelConfig&, std::uint64_t, bool);
extern template ModelParams<double> init_params(const ModelConfig&, std::uint64_t, bool);
extern template RfParams<float> init_rf_params(const ModelConfig&, std::uint64_t);
extern template RfParams<double> init_rf_params(const ModelConfig&, std::uint64_t);
extern template ModelParams<double> params_to_double(const ModelParams<float>&);
extern template ModelParams<double> params_to_double(const ModelParams<double>&);
extern template std::vector<std::string> param_names(ModelParams<float>&);
extern template std::vector<std::string> param_names(ModelParams<double>&);

}  // namespace rfda
