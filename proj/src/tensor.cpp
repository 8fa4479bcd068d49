#include "rfda/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rfda {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << 'x';
    os << s[i];
  }
  os << ']';
  return os.str();
}

std::int64_t shape_numel(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

template <typename S>
Tensor<S>::Tensor(Shape shape) : d_(std::make_shared<Data>()) {
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor: non-positive dim in " + shape_str(shape));
  }
  d_->shape = std::move(shape);
  d_->values.assign(static_cast<std::size_t>(shape_numel(d_->shape)), S(0));
}

template <typename S>
Tensor<S>::Tensor(Shape shape, std::vector<S> values) : d_(std::make_shared<Data>()) {
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
    throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                " values for shape " + shape_str(shape));
  }
  d_->shape = std::move(shape);
  d_->values = std::move(values);
}

template <typename S>
Tensor<S>::Tensor(Shape shape, std::initializer_list<S> values)
    : Tensor(std::move(shape), std::vector<S>(values)) {}

template <typename S>
Tensor<S> Tensor<S>::full(Shape shape, S v) {
  Tensor t(std::move(shape));
  for (S& x : t.d_->values) x = v;
  return t;
}

template <typename S>
S& Tensor<S>::at(int a, int b) {
  return d_->values.at(static_cast<std::size_t>(a) * d_->shape[1] + b);
}

template <typename S>
S& Tensor<S>::at(int a, int b, int c) {
  const Shape& s = d_->shape;
  return d_->values.at((static_cast<std::size_t>(a) * s[1] + b) * s[2] + c);
}

template <typename S>
S Tensor<S>::at(int a, int b, int c) const {
  const Shape& s = d_->shape;
  return d_->values.at((static_cast<std::size_t>(a) * s[1] + b) * s[2] + c);
}

template <typename S>
S& Tensor<S>::at(int a, int b, int c, int e) {
  const Shape& s = d_->shape;
  return d_->values.at(((static_cast<std::size_t>(a) * s[1] + b) * s[2] + c) * s[3] + e);
}

template <typename S>
S Tensor<S>::at(int a, int b, int c, int e) const {
  const Shape& s = d_->shape;
  return d_->values.at(((static_cast<std::size_t>(a) * s[1] + b) * s[2] + c) * s[3] + e);
}

template <typename S>
void Tensor<S>::set_requires_grad(bool on) {
  if (!d_) throw std::logic_error("set_requires_grad on empty tensor");
  d_->requires_grad = on;
  if (on) {
    d_->grad.assign(d_->values.size(), S(0));
  } else {
    d_->grad.clear();
    d_->leaf = true;
  }
}

template <typename S>
void Tensor<S>::zero_grad() {
  for (S& g : d_->grad) g = S(0);
}

template <typename S>
Tensor<S> Tensor<S>::clone() const {
  Tensor t;
  t.d_ = std::make_shared<Data>();
  t.d_->shape = d_->shape;
  t.d_->values = d_->values;
  return t;
}

template <typename S>
bool all_finite(const Tensor<S>& t) {
  for (S v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {
thread_local void* g_active_tape_f = nullptr;
thread_local void* g_active_tape_d = nullptr;

template <typename S>
void*& active_slot() {
  if constexpr (std::is_same_v<S, float>) {
    return g_active_tape_f;
  } else {
    return g_active_tape_d;
  }
}
}  // namespace

template <typename S>
GradTape<S>::GradTape() {
  prev_ = static_cast<GradTape*>(active_slot<S>());
  active_slot<S>() = this;
}

template <typename S>
GradTape<S>::~GradTape() {
  active_slot<S>() = prev_;
}

template <typename S>
GradTape<S>* GradTape<S>::active() {
  return static_cast<GradTape*>(active_slot<S>());
}

template <typename S>
void GradTape<S>::record(Tensor<S> out, std::function<void()> backward) {
  out.d_->requires_grad = true;
  out.d_->leaf = false;
  out.d_->grad.assign(out.d_->values.size(), S(0));
  nodes_.push_back(Node{std::move(out), std::move(backward)});
}

template <typename S>
void GradTape<S>::backward(const Tensor<S>& loss) {
  if (!loss.valid() || loss.numel() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  }
  if (!loss.requires_grad()) {
    throw std::invalid_argument("backward: loss does not depend on any tracked tensor");
  }
  // Interior grads are scratch for this pass; leaves keep accumulating.
  for (Node& n : nodes_) n.out.zero_grad();
  loss.d_->grad[0] += S(1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->back();
}

template class Tensor<float>;
template class Tensor<double>;
template class GradTape<float>;
template class GradTape<double>;
template bool all_finite(const Tensor<float>&);
template bool all_finite(const Tensor<double>&);

}  // namespace rfda
