#include "rfda/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace rfda {

ModelConfig ModelConfig::standard() {
  ModelConfig c;
  c.R = 3;
  c.F = 64;
  c.K = 3;
  c.L = 2;
  c.beta = 0.2;
  c.preset = "standard";
  return c;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.R = 3;
  c.F = 16;
  c.K = 3;
  c.L = 1;
  c.beta = 0.2;
  c.preset = "tiny";
  return c;
}

std::optional<ModelConfig> ModelConfig::by_name(const std::string& name) {
  if (name == "standard") return standard();
  if (name == "tiny") return tiny();
  return std::nullopt;
}

void ModelConfig::validate() const {
  if (R < 0) throw std::invalid_argument("config: R must be >= 0");
  if (F < 16 || F % 16 != 0) throw std::invalid_argument("config: F must be a positive multiple of 16");
  if (K < 1 || K % 2 == 0) throw std::invalid_argument("config: K must be odd");
  if (L < 1) throw std::invalid_argument("config: L must be >= 1");
  if (!(beta >= 0 && beta <= 1)) throw std::invalid_argument("config: beta must be in [0,1]");
}

bool ModelConfig::operator==(const ModelConfig& o) const {
  // beta compares at weight-file precision so a config round-tripped through
  // a checkpoint stays equal to the one it was saved from.
  return R == o.R && F == o.F && K == o.K && L == o.L &&
         static_cast<float>(beta) == static_cast<float>(o.beta);
}

namespace {

template <typename S>
ConvLayer<S> conv_he(std::mt19937_64& rng, int co, int ci, int k) {
  ConvLayer<S> l;
  l.w = Tensor<S>({co, ci, k, k});
  l.b = Tensor<S>({co});
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (ci * k * k)));
  for (S& v : l.w.values()) v = static_cast<S>(dist(rng));
  return l;
}

template <typename S>
ConvLayer<S> conv_zero(int co, int ci, int k) {
  ConvLayer<S> l;
  l.w = Tensor<S>({co, ci, k, k});
  l.b = Tensor<S>({co});
  return l;
}

template <typename S>
ConvLayer<S> conv_identity(int c) {
  ConvLayer<S> l;
  l.w = Tensor<S>({c, c, 1, 1});
  l.b = Tensor<S>({c});
  for (int i = 0; i < c; ++i) l.w.at(i, i, 0, 0) = S(1);
  return l;
}

template <typename S>
Tensor<S> fc_he(std::mt19937_64& rng, int dout, int din) {
  Tensor<S> w({dout, din});
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / din));
  for (S& v : w.values()) v = static_cast<S>(dist(rng));
  return w;
}

template <typename S>
DstaParams<S> init_dsta(std::mt19937_64& rng, const ModelConfig& cfg) {
  const int F = cfg.F, Fq = F / 4, K = cfg.K;
  DstaParams<S> d;
  d.reduce = conv_he<S>(rng, Fq, F, 1);
  d.down = conv_he<S>(rng, Fq, Fq, 3);
  d.off_coarse1 = conv_he<S>(rng, Fq, Fq, 3);
  d.off_coarse2 = conv_he<S>(rng, Fq, Fq, 3);
  d.off_fine = conv_he<S>(rng, Fq, Fq, 3);
  d.off_head = conv_zero<S>(2 * K * K, Fq, 3);
  d.attn = conv_he<S>(rng, Fq, Fq, 3);
  d.spatial = conv_he<S>(rng, 1, Fq, 1);
  d.fc1_w = fc_he<S>(rng, F / 16, Fq);
  d.fc1_b = Tensor<S>({F / 16});
  d.fc2_w = fc_he<S>(rng, F, F / 16);
  d.fc2_b = Tensor<S>({F});
  return d;
}

}  // namespace

template <typename S>
RfParams<S> init_rf_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int F = cfg.F;
  RfParams<S> r;
  r.off1 = conv_he<S>(rng, F, 2 * F, 3);
  r.off2 = conv_zero<S>(2 * F, F, 3);  // start from zero offsets: copy-previous regime
  r.mix = conv_identity<S>(F);
  r.fe1 = conv_he<S>(rng, F, 2 * F, 3);
  r.fe2 = conv_zero<S>(F, F, 3);  // zero residual: stage 2 starts exactly at stage 1's model
  return r;
}

template <typename S>
ModelParams<S> init_params(const ModelConfig& cfg, std::uint64_t seed, bool with_rf) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const int W = cfg.window(), F = cfg.F, K = cfg.K;
  ModelParams<S> p;
  p.config = cfg;

  p.stdf.in_conv = conv_he<S>(rng, 32, W, 3);
  p.stdf.enc1a = conv_he<S>(rng, 32, 32, 3);
  p.stdf.enc1b = conv_he<S>(rng, 32, 32, 3);
  p.stdf.enc2a = conv_he<S>(rng, 32, 32, 3);
  p.stdf.enc2b = conv_he<S>(rng, 32, 32, 3);
  p.stdf.dec1 = conv_he<S>(rng, 32, 64, 3);
  p.stdf.dec2 = conv_he<S>(rng, 32, 64, 3);
  p.stdf.head = conv_zero<S>(W * 2 * K * K, 32, 3);
  p.stdf.fusion = conv_he<S>(rng, F, W, K);

  p.qe.entry = conv_he<S>(rng, F, F, 3);
  for (int i = 0; i < cfg.L; ++i) {
    p.qe.blocks.push_back(init_dsta<S>(rng, cfg));
    p.qe.inter.push_back(conv_he<S>(rng, F, F, 3));
  }
  p.qe.exit = conv_zero<S>(1, F, 3);  // zero residual at start: enhanced == input

  if (with_rf) p.rf = init_rf_params<S>(cfg, seed);
  return p;
}

template <typename S>
ModelParams<double> params_to_double(const ModelParams<S>& p) {
  ModelParams<double> q;
  q.config = p.config;
  auto& src = const_cast<ModelParams<S>&>(p);
  if (src.rf) q.rf = RfParams<double>{};
  q.qe.blocks.resize(p.qe.blocks.size());
  q.qe.inter.resize(p.qe.inter.size());
  std::vector<Tensor<double>*> dst;
  visit_params(q, [&](const std::string&, Tensor<double>& t, ParamGroup) { dst.push_back(&t); });
  std::size_t i = 0;
  visit_params(src, [&](const std::string&, Tensor<S>& t, ParamGroup) {
    std::vector<double> vals(t.values().begin(), t.values().end());
    *dst[i++] = Tensor<double>(t.shape(), std::move(vals));
  });
  return q;
}

template <typename S>
std::vector<std::string> param_names(ModelParams<S>& p) {
  std::vector<std::string> names;
  visit_params(p, [&](const std::string& n, Tensor<S>&, ParamGroup) { names.push_back(n); });
  return names;
}

template ModelParams<float> init_params(const ModelConfig&, std::uint64_t, bool);
template ModelParams<double> init_params(const ModelConfig&, std::uint64_t, bool);
template RfParams<float> init_rf_params(const ModelConfig&, std::uint64_t);
template RfParams<double> init_rf_params(const ModelConfig&, std::uint64_t);
template ModelParams<double> params_to_double(const ModelParams<float>&);
template ModelParams<double> params_to_double(const ModelParams<double>&);
template std::vector<std::string> param_names(ModelParams<float>&);
template std::vector<std::string> param_names(ModelParams<double>&);

}  // namespace rfda
