#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfda/model.hpp"
#include "rfda/video.hpp"

namespace rfda {

struct TrainConfig {
  int stage = 1;
  double base_lr = 1e-4;            // stage-1 rate for everything
  double stage2_lr_stdf_qe = 1e-5;  // lowered for the pretrained parts
  double stage2_lr_rf = 1e-4;       // the freshly added recurrent block
  int total_iters = 1000;
  double decay_point1 = 0.6, decay_point2 = 0.9;  // fractions of total_iters
  double decay_factor = 0.5;
  int batch_size = 4;
  int crop = 48;
  int clip_len = 15;
  double eps = 1e-6;  // Charbonnier smoothing
  std::uint64_t seed = 1;
  int bptt = 0;  // detach the carried state every N frames; 0 = never
  double grad_clip = 5.0;
  int log_every = 50;
  int val_every = 0;  // compute a validation delta-PSNR every N iters; 0 = off

  void validate() const;
};

// Stepwise decay: full rate, then halved at decay_point1, halved again at
// decay_point2 (thresholds inclusive).
double lr_decay_factor(int iter, const TrainConfig& cfg);
double lr_schedule(int iter, const TrainConfig& cfg);  // base_lr * factor

// Raised when a loss or gradient goes non-finite; carries enough state to
// diagnose the blow-up.
struct TrainAbort : std::runtime_error {
  int iteration;
  double lr;
  std::vector<double> recent_losses;
  TrainAbort(const std::string& msg, int iter, double lr_now, std::vector<double> hist);
};

// One of the 8 axis-aligned symmetries of a square: index = flip*4 + quarter
// turns.  Rotations require square spatial extents.
template <typename S>
Tensor<S> dihedral(const Tensor<S>& x, int which);
int dihedral_inverse(int which);
int dihedral_compose(int first, int then);

template <typename S>
struct DataVideo {
  VideoClip<S> gt, compressed;
};
template <typename S>
using Dataset = std::vector<DataVideo<S>>;

// Frames t0-R .. t0+len-1+R of the sequence with out-of-range indices
// clamped, so window slices need no further bounds handling.
template <typename S>
std::vector<Tensor<S>> extend_clamped(const std::vector<Tensor<S>>& frames, int t0, int len,
                                      int R);

// Single-frame training graph: fuse the window, run the enhancement head on
// the center frame, compare against ground truth.
template <typename S>
Tensor<S> frame_loss(const ModelParams<S>& params, const Tensor<S>& window,
                     const Tensor<S>& gt_frame, double eps);

// Clip-level graph: the streaming recurrence over gt.size() frames with
// gradients flowing through the carried state (optionally detached every
// bptt frames).  comp must hold gt.size() + 2R frames (see extend_clamped).
template <typename S>
Tensor<S> clip_loss(const ModelParams<S>& params, const std::vector<Tensor<S>>& comp,
                    const std::vector<Tensor<S>>& gt, double eps, int bptt = 0);

struct TrainStats {
  std::vector<double> loss_curve;   // one entry per iteration
  std::vector<double> grad_norms;   // pre-clip global norm per iteration
};

// Adam with bias correction and global-norm gradient clipping, one moment
// pair per parameter tensor, per-group learning rates.
template <typename S>
class AdamOpt {
 public:
  explicit AdamOpt(ModelParams<S>& params);
  // Applies one update from the accumulated grads, then zeroes them.
  // Returns the pre-clip global gradient norm; throws on non-finite grads.
  double step(double lr_stdf, double lr_rf, double lr_qe, double clip_norm);
  long steps_taken() const { return step_; }

 private:
  struct Slot {
    std::string name;
    Tensor<S> t;
    ParamGroup group;
    std::vector<S> m, v;
  };
  std::vector<Slot> slots_;
  long step_ = 0;
};

template <typename S>
class Trainer {
 public:
  using Observer = std::function<void(int iter, double lr, double loss)>;

  // Trains params in place on the dataset.  csv_log, when set, receives
  // "iter,lr,loss,delta_psnr" lines every log_every iterations.
  Trainer(ModelParams<S>& params, const Dataset<S>& data, const TrainConfig& cfg);

  TrainStats run(std::ostream* csv_log = nullptr, const Observer& obs = {});

  // Tracks which parameters saw a nonzero gradient during the first n iters.
  void enable_grad_audit(int iters) { audit_iters_ = iters; }
  std::vector<std::string> grad_audit_misses() const;

 private:
  ModelParams<S>& params_;
  const Dataset<S>& data_;
  TrainConfig cfg_;
  int audit_iters_ = 0;
  std::vector<std::string> audit_names_;
  std::vector<bool> audit_seen_;
  double probe_delta_psnr() const;
};

template <typename S>
ModelParams<S> clone_params(const ModelParams<S>& p);

template <typename S>
ModelParams<S> train_stage1(const Dataset<S>& data, const ModelConfig& model_cfg,
                            const TrainConfig& cfg, std::ostream* csv_log = nullptr,
                            const typename Trainer<S>::Observer& obs = {});

template <typename S>
ModelParams<S> train_stage2(const Dataset<S>& data, const ModelParams<S>& stage1,
                            const TrainConfig& cfg, std::ostream* csv_log = nullptr,
                            const typename Trainer<S>::Observer& obs = {});

#define RFDA_TRAINER_DECL(S)                                                              \
  extern template Tensor<S> dihedral(const Tensor<S>&, int);                              \
  extern template std::vector<Tensor<S>> extend_clamped(const std::vector<Tensor<S>>&,    \
                                                        int, int, int);                   \
  extern template Tensor<S> frame_loss(const ModelParams<S>&, const Tensor<S>&,           \
                                       const Tensor<S>&, double);                         \
  extern template Tensor<S> clip_loss(const ModelParams<S>&, const std::vector<Tensor<S>>&, \
                                      const std::vector<Tensor<S>>&, double, int);        \
  extern template class AdamOpt<S>;                                                       \
  extern template class Trainer<S>;                                                       \
  extern template ModelParams<S> clone_params(const ModelParams<S>&);                     \
  extern template ModelParams<S> train_stage1(const Dataset<S>&, const ModelConfig&,      \
                                              const TrainConfig&, std::ostream*,          \
                                              const typename Trainer<S>::Observer&);      \
  extern template ModelParams<S> train_stage2(const Dataset<S>&, const ModelParams<S>&,   \
                                              const TrainConfig&, std::ostream*,          \
                                              const typename Trainer<S>::Observer&);
RFDA_TRAINER_DECL(float)
RFDA_TRAINER_DECL(double)
#undef RFDA_TRAINER_DECL

}  // namespace rfda
