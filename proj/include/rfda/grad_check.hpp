#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rfda/tensor.hpp"

namespace rfda {

struct GradCheckResult {
  double max_rel_err = 0;
  int worst_tensor = -1;
  std::int64_t worst_index = -1;
  double analytic = 0;
  double numeric = 0;
};

// Central-difference audit of d f() / d x at the current point.  f must be a
// deterministic scalar-valued function reading x's storage (no tape of its
// own).  Checks the listed flat coordinates, or every coordinate when the
// list is empty.  Relative error uses |a - n| / max(|a|, |n|, 1e-8).
template <typename S>
GradCheckResult finite_diff_check(const std::function<Tensor<S>()>& f, Tensor<S>& x,
                                  double h = 1e-4,
                                  const std::vector<std::int64_t>& coords = {});

// Same audit against several tensors with one shared analytic backward pass.
// coords[i] lists the flat indices to probe in xs[i] (empty = all).
template <typename S>
GradCheckResult finite_diff_check_many(const std::function<Tensor<S>()>& f,
                                       std::vector<Tensor<S>>& xs,
                                       const std::vector<std::vector<std::int64_t>>& coords,
                                       double h = 1e-4);

extern template GradCheckResult finite_diff_check(const std::function<Tensor<float>()>&,
                                                  Tensor<float>&, double,
                                                  const std::vector<std::int64_t>&);
extern template GradCheckResult finite_diff_check(const std::function<Tensor<double>()>&,
                                                  Tensor<double>&, double,
                                                  const std::vector<std::int64_t>&);
extern template GradCheckResult finite_diff_check_many(
    const std::function<Tensor<float>()>&, std::vector<Tensor<float>>&,
    const std::vector<std::vector<std::int64_t>>&, double);
extern template GradCheckResult finite_diff_check_many(
    const std::function<Tensor<double>()>&, std::vector<Tensor<double>>&,
    const std::vector<std::vector<std::int64_t>>&, double);

}  // namespace rfda
