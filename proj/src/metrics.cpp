#include "rfda/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rfda {

namespace {

template <typename S>
std::pair<int, int> frame_dims(const Tensor<S>& t, const char* op) {
  if (!t.valid() || t.ndim() < 2)
    throw std::invalid_argument(std::string(op) + ": frame must be [H,W] or [1,H,W]");
  const int H = t.dim(t.ndim() - 2), W = t.dim(t.ndim() - 1);
  if (t.numel() != static_cast<std::int64_t>(H) * W)
    throw std::invalid_argument(std::string(op) + ": frame must be single-channel");
  return {H, W};
}

template <typename S>
void check_same(const Tensor<S>& a, const Tensor<S>& b, const char* op) {
  auto da = frame_dims(a, op), db = frame_dims(b, op);
  if (da != db)
    throw std::invalid_argument(std::string(op) + ": size mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
}

}  // namespace

template <typename S>
double psnr(const Tensor<S>& a, const Tensor<S>& b, double peak) {
  check_same(a, b, "psnr");
  if (!(peak > 0)) throw std::invalid_argument("psnr: peak must be positive");
  const std::int64_t n = a.numel();
  const S* pa = a.data();
  const S* pb = b.data();
  double acc = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(n);
  if (mse == 0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(peak * peak / mse));
}

template <typename S>
double ssim(const Tensor<S>& a, const Tensor<S>& b, double peak) {
  check_same(a, b, "ssim");
  auto [H, W] = frame_dims(a, "ssim");
  constexpr int win = 11, half = 5;
  if (H < win || W < win)
    throw std::invalid_argument("ssim: frame smaller than the 11x11 window");

  // Normalized 11x11 Gaussian, sigma 1.5.
  static const std::vector<double> g = [] {
    std::vector<double> k(win * win);
    double sum = 0;
    for (int r = 0; r < win; ++r)
      for (int c = 0; c < win; ++c) {
        const double dr = r - half, dc = c - half;
        k[r * win + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * 1.5 * 1.5));
        sum += k[r * win + c];
      }
    for (double& v : k) v /= sum;
    return k;
  }();

  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const S* pa = a.data();
  const S* pb = b.data();
  double acc = 0;
  std::int64_t cnt = 0;
  for (int r = half; r < H - half; ++r) {
    for (int c = half; c < W - half; ++c) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i) {
        const S* ra = pa + static_cast<std::size_t>(r - half + i) * W + (c - half);
        const S* rb = pb + static_cast<std::size_t>(r - half + i) * W + (c - half);
        const double* gr = g.data() + i * win;
        for (int j = 0; j < win; ++j) {
          const double va = ra[j], vb = rb[j], w = gr[j];
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      const double num = (2 * ma * mb + c1) * (2 * cov + c2);
      const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      acc += num / den;
      ++cnt;
    }
  }
  return acc / static_cast<double>(cnt);
}

FluctuationStats quality_fluctuation(const std::vector<double>& curve) {
  if (curve.empty())
    throw std::invalid_argument("quality_fluctuation: empty curve");
  FluctuationStats out;
  double mean = 0;
  for (double v : curve) mean += v;
  mean /= static_cast<double>(curve.size());
  double var = 0;
  for (double v : curve) var += (v - mean) * (v - mean);
  out.sd = std::sqrt(var / static_cast<double>(curve.size()));

  // Collapse plateaus, then classify strict interior extrema.
  std::vector<double> c;
  for (double v : curve)
    if (c.empty() || c.back() != v) c.push_back(v);
  std::vector<std::pair<std::size_t, bool>> extrema;  // index, is_peak
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    if (c[i] > c[i - 1] && c[i] > c[i + 1]) extrema.push_back({i, true});
    if (c[i] < c[i - 1] && c[i] < c[i + 1]) extrema.push_back({i, false});
  }
  double drop = 0;
  int pairs = 0;
  for (std::size_t i = 0; i + 1 < extrema.size(); ++i) {
    if (extrema[i].second && !extrema[i + 1].second) {
      drop += c[extrema[i].first] - c[extrema[i + 1].first];
      ++pairs;
    }
  }
  if (pairs > 0) out.pvd = drop / pairs;
  return out;
}

template <typename S>
std::pair<double, double> delta_metrics(const std::vector<Tensor<S>>& enhanced,
                                        const std::vector<Tensor<S>>& compressed,
                                        const std::vector<Tensor<S>>& gt) {
  if (enhanced.size() != compressed.size() || enhanced.size() != gt.size() ||
      enhanced.empty())
    throw std::invalid_argument("delta_metrics: clips must have equal nonzero length");
  double dp = 0, ds = 0;
  for (std::size_t t = 0; t < enhanced.size(); ++t) {
    dp += psnr(enhanced[t], gt[t]) - psnr(compressed[t], gt[t]);
    ds += ssim(enhanced[t], gt[t]) - ssim(compressed[t], gt[t]);
  }
  const double n = static_cast<double>(enhanced.size());
  return {dp / n, ds / n};
}

template <typename S>
MetricsReport evaluate_clips(const std::vector<Tensor<S>>& enhanced,
                             const std::vector<Tensor<S>>& compressed,
                             const std::vector<Tensor<S>>& gt) {
  MetricsReport rep;
  auto [dp, ds] = delta_metrics(enhanced, compressed, gt);
  rep.delta_psnr = dp;
  rep.delta_ssim = ds;
  for (std::size_t t = 0; t < enhanced.size(); ++t) {
    rep.per_frame_psnr.push_back(psnr(enhanced[t], gt[t]));
    rep.per_frame_ssim.push_back(ssim(enhanced[t], gt[t]));
  }
  FluctuationStats fs = quality_fluctuation(rep.per_frame_psnr);
  rep.pvd = fs.pvd;  // absent for curves too short to have interior extrema
  rep.sd = fs.sd;
  return rep;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["per_frame_psnr"] = per_frame_psnr;
  j["per_frame_ssim"] = per_frame_ssim;
  j["delta_psnr"] = delta_psnr;
  j["delta_ssim"] = delta_ssim;
  if (pvd)
    j["pvd"] = *pvd;
  else
    j["pvd"] = nullptr;
  j["sd"] = sd;
  return j.dump(2);
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "frame,psnr,ssim\n";
  for (std::size_t i = 0; i < per_frame_psnr.size(); ++i)
    os << i << ',' << per_frame_psnr[i] << ',' << per_frame_ssim[i] << '\n';
  return os.str();
}

#define RFDA_METRICS_DEF(S)                                                   \
  template double psnr(const Tensor<S>&, const Tensor<S>&, double);           \
  template double ssim(const Tensor<S>&, const Tensor<S>&, double);           \
  template std::pair<double, double> delta_metrics(                           \
      const std::vector<Tensor<S>>&, const std::vector<Tensor<S>>&,           \
      const std::vector<Tensor<S>>&);                                         \
  template MetricsReport evaluate_clips(const std::vector<Tensor<S>>&,        \
                                        const std::vector<Tensor<S>>&,        \
                                        const std::vector<Tensor<S>>&);
RFDA_METRICS_DEF(float)
RFDA_METRICS_DEF(double)
#undef RFDA_METRICS_DEF

}  // namespace rfda
