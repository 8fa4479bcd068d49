#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace rfda {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::int64_t shape_numel(const Shape& s);

// Dense row-major n-d array of float or double.  Copies of a Tensor share
// storage (shallow handle); use clone() for an independent copy.  A tensor
// created directly is a leaf; op outputs recorded on a GradTape are interior
// nodes whose grad buffers are scratch space owned by the tape replay.
template <typename S>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<S> values);
  Tensor(Shape shape, std::initializer_list<S> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, S v);
  static Tensor scalar(S v) { return Tensor({1}, {v}); }

  bool valid() const { return d_ != nullptr; }
  const Shape& shape() const { return d_->shape; }
  int ndim() const { return static_cast<int>(d_->shape.size()); }
  int dim(int i) const { return d_->shape[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(d_->values.size()); }

  S* data() { return d_->values.data(); }
  const S* data() const { return d_->values.data(); }
  std::vector<S>& values() { return d_->values; }
  const std::vector<S>& values() const { return d_->values; }

  S& at(int i) { return d_->values.at(static_cast<std::size_t>(i)); }
  S at(int i) const { return d_->values.at(static_cast<std::size_t>(i)); }
  S& at(int a, int b);
  S& at(int a, int b, int c);
  S& at(int a, int b, int c, int e);
  S at(int a, int b, int c) const;
  S at(int a, int b, int c, int e) const;

  // Enables gradient accumulation into this tensor (allocates a zeroed grad
  // buffer).  Disabling drops the buffer.
  void set_requires_grad(bool on);
  bool requires_grad() const { return d_ && d_->requires_grad; }
  bool is_leaf() const { return !d_ || d_->leaf; }

  S* grad() { return d_->grad.empty() ? nullptr : d_->grad.data(); }
  const S* grad() const { return d_->grad.empty() ? nullptr : d_->grad.data(); }
  std::vector<S>& grad_vec() { return d_->grad; }
  void zero_grad();

  Tensor clone() const;  // deep copy; result is an untracked leaf

  bool same_storage(const Tensor& o) const { return d_ == o.d_; }

  struct Data {
    Shape shape;
    std::vector<S> values;
    std::vector<S> grad;
    bool requires_grad = false;
    bool leaf = true;
  };
  std::shared_ptr<Data> d_;
};

template <typename S>
bool all_finite(const Tensor<S>& t);

// Records op closures in execution order while alive on the current thread.
// backward(loss) seeds d(loss)/d(loss) = 1 and replays the closures in
// reverse.  Interior-node grads are zeroed at the start of every backward
// pass; leaf grads are only ever accumulated into, so calling backward twice
// doubles the leaf gradients and running two losses on one tape sums their
// contributions.
template <typename S>
class GradTape {
 public:
  GradTape();
  ~GradTape();
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  static GradTape* active();

  // Marks out as a tracked interior node and stores its backward closure.
  void record(Tensor<S> out, std::function<void()> backward);

  void backward(const Tensor<S>& loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<S> out;
    std::function<void()> back;
  };
  std::vector<Node> nodes_;
  GradTape* prev_ = nullptr;
};

// True when an op called with these inputs should record onto the active tape.
template <typename S, typename... Ts>
bool tracking(const Tensor<S>& first, const Ts&... rest) {
  if (GradTape<S>::active() == nullptr) return false;
  bool any = first.requires_grad();
  ((any = any || rest.requires_grad()), ...);
  return any;
}

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class GradTape<float>;
extern template class GradTape<double>;
extern template bool all_finite(const Tensor<float>&);
extern template bool all_finite(const Tensor<double>&);

}  // namespace rfda
