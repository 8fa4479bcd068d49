#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rfda/tensor.hpp"

namespace rfda {

// Frames are [H,W] or [1,H,W] tensors of [0,1] luma values; all statistics
// run in double regardless of the storage type.

// 10*log10(peak^2 / MSE), capped at 100 dB (the zero-MSE sentinel).
template <typename S>
double psnr(const Tensor<S>& a, const Tensor<S>& b, double peak = 1.0);

// Mean local SSIM over an 11x11 Gaussian window (sigma 1.5), valid region
// only, with the standard constants C1=(0.01*peak)^2, C2=(0.03*peak)^2.
template <typename S>
double ssim(const Tensor<S>& a, const Tensor<S>& b, double peak = 1.0);

struct FluctuationStats {
  std::optional<double> pvd;  // mean peak-to-following-valley drop; absent if no pairs
  double sd = 0;              // population standard deviation
};

// Stability statistics of a per-frame PSNR curve.  Plateaus collapse to one
// point; peaks/valleys are strict interior extrema; each peak pairs with the
// next valley.
FluctuationStats quality_fluctuation(const std::vector<double>& psnr_curve);

struct MetricsReport {
  std::vector<double> per_frame_psnr;   // enhanced vs ground truth
  std::vector<double> per_frame_ssim;
  double delta_psnr = 0;                // mean improvement over compressed
  double delta_ssim = 0;
  std::optional<double> pvd;
  double sd = 0;

  std::string to_json() const;
  std::string to_csv() const;
};

// Mean per-frame (PSNR, SSIM) improvement of enhanced over compressed, both
// against ground truth.
template <typename S>
std::pair<double, double> delta_metrics(const std::vector<Tensor<S>>& enhanced,
                                        const std::vector<Tensor<S>>& compressed,
                                        const std::vector<Tensor<S>>& gt);

template <typename S>
MetricsReport evaluate_clips(const std::vector<Tensor<S>>& enhanced,
                             const std::vector<Tensor<S>>& compressed,
                             const std::vector<Tensor<S>>& gt);

#define RFDA_METRICS_DECL(S)                                                          \
  extern template double psnr(const Tensor<S>&, const Tensor<S>&, double);            \
  extern template double ssim(const Tensor<S>&, const Tensor<S>&, double);            \
  extern template std::pair<double, double> delta_metrics(                            \
      const std::vector<Tensor<S>>&, const std::vector<Tensor<S>>&,                   \
      const std::vector<Tensor<S>>&);                                                 \
  extern template MetricsReport evaluate_clips(const std::vector<Tensor<S>>&,         \
                                               const std::vector<Tensor<S>>&,         \
                                               const std::vector<Tensor<S>>&);
RFDA_METRICS_DECL(float)
RFDA_METRICS_DECL(double)
#undef RFDA_METRICS_DECL

}  // namespace rfda
