#include "rfda/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace rfda {

template <typename S>
GradCheckResult finite_diff_check_many(const std::function<Tensor<S>()>& f,
                                       std::vector<Tensor<S>>& xs,
                                       const std::vector<std::vector<std::int64_t>>& coords,
                                       double h) {
  if (xs.empty() || xs.size() != coords.size())
    throw std::invalid_argument("finite_diff_check: tensor/coordinate list mismatch");
  if (!(h > 0)) throw std::invalid_argument("finite_diff_check: h must be positive");

  std::vector<bool> was_tracked(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    was_tracked[i] = xs[i].requires_grad();
    xs[i].set_requires_grad(true);
  }
  std::vector<std::vector<S>> analytic(xs.size());
  {
    GradTape<S> tape;
    Tensor<S> loss = f();
    tape.backward(loss);
    for (std::size_t i = 0; i < xs.size(); ++i) analytic[i] = xs[i].grad_vec();
  }
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i].set_requires_grad(was_tracked[i]);

  GradCheckResult res;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<std::int64_t> all;
    const std::vector<std::int64_t>* idxs = &coords[i];
    if (idxs->empty()) {
      all.resize(static_cast<std::size_t>(xs[i].numel()));
      for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<std::int64_t>(j);
      idxs = &all;
    }
    for (std::int64_t j : *idxs) {
      if (j < 0 || j >= xs[i].numel())
        throw std::invalid_argument("finite_diff_check: coordinate out of range");
      const S v = xs[i].at(static_cast<int>(j));
      xs[i].at(static_cast<int>(j)) = v + static_cast<S>(h);
      const double fp = static_cast<double>(f().at(0));
      xs[i].at(static_cast<int>(j)) = v - static_cast<S>(h);
      const double fm = static_cast<double>(f().at(0));
      xs[i].at(static_cast<int>(j)) = v;
      const double num = (fp - fm) / (2 * h);
      const double ana = static_cast<double>(analytic[i][static_cast<std::size_t>(j)]);
      const double rel =
          std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-8});
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_tensor = static_cast<int>(i);
        res.worst_index = j;
        res.analytic = ana;
        res.numeric = num;
      }
    }
  }
  return res;
}

template <typename S>
GradCheckResult finite_diff_check(const std::function<Tensor<S>()>& f, Tensor<S>& x,
                                  double h, const std::vector<std::int64_t>& coords) {
  std::vector<Tensor<S>> xs{x};
  std::vector<std::vector<std::int64_t>> cs{coords};
  return finite_diff_check_many(f, xs, cs, h);
}

template GradCheckResult finite_diff_check(const std::function<Tensor<float>()>&,
                                           Tensor<float>&, double,
                                           const std::vector<std::int64_t>&);
template GradCheckResult finite_diff_check(const std::function<Tensor<double>()>&,
                                           Tensor<double>&, double,
                                           const std::vector<std::int64_t>&);
template GradCheckResult finite_diff_check_many(const std::function<Tensor<float>()>&,
                                                std::vector<Tensor<float>>&,
                                                const std::vector<std::vector<std::int64_t>>&,
                                                double);
template GradCheckResult finite_diff_check_many(const std::function<Tensor<double>()>&,
                                                std::vector<Tensor<double>>&,
                                                const std::vector<std::vector<std::int64_t>>&,
                                                double);

}  // namespace rfda
