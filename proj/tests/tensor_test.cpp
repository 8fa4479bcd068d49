#include <cmath>
#include <vector>

#include "doctest.h"
#include "rfda/ops.hpp"
#include "rfda/tensor.hpp"

using namespace rfda;

TEST_CASE("tensor construction and element access") {
  Tensor<double> t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.ndim() == 2);
  CHECK(t.dim(0) == 2);
  CHECK(t.dim(1) == 3);
  CHECK(t.numel() == 6);
  CHECK(t.at(1, 2) == 6.0);
  t.at(0, 1) = 9.0;
  CHECK(t.at(1) == 9.0);

  Tensor<double> z = Tensor<double>::zeros({4});
  for (int i = 0; i < 4; ++i) CHECK(z.at(i) == 0.0);
  CHECK(Tensor<double>::full({2}, 3.5).at(1) == 3.5);
  CHECK(Tensor<double>::scalar(7.0).numel() == 1);
  CHECK_FALSE(Tensor<double>().valid());
  CHECK_THROWS_AS(Tensor<double>({2, 2}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("tensors share storage until cloned") {
  Tensor<double> a({3}, {1, 2, 3});
  Tensor<double> b = a;
  b.at(0) = 5;
  CHECK(a.at(0) == 5.0);
  CHECK(a.same_storage(b));

  Tensor<double> c = a.clone();
  c.at(0) = 9;
  CHECK(a.at(0) == 5.0);
  CHECK_FALSE(a.same_storage(c));
}

TEST_CASE("backward accumulates into leaves and zeroes interior grads") {
  Tensor<double> x({2}, {1.0, 2.0});
  Tensor<double> y({2}, {3.0, 4.0});
  x.set_requires_grad(true);
  y.set_requires_grad(true);

  Tensor<double> mid;
  {
    GradTape<double> tape;
    mid = mul(x, y);
    Tensor<double> loss = sum_all(mid);
    tape.backward(loss);
  }
  REQUIRE(x.grad() != nullptr);
  CHECK(x.grad()[0] == 3.0);
  CHECK(x.grad()[1] == 4.0);
  CHECK(y.grad()[0] == 1.0);
  CHECK(y.grad()[1] == 2.0);
  // mid is interior: its grad buffer must not leak stale values to a later pass
  {
    GradTape<double> tape;
    Tensor<double> loss = sum_all(mul(x, y));
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == 6.0);  // second pass accumulated on top
  CHECK(y.grad()[1] == 4.0);

  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("values used twice receive both contributions") {
  Tensor<double> x({2}, {2.0, 3.0});
  x.set_requires_grad(true);
  {
    GradTape<double> tape;
    Tensor<double> loss = sum_all(mul(x, x));  // d/dx x^2 = 2x
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == 4.0);
  CHECK(x.grad()[1] == 6.0);
}

TEST_CASE("detach blocks gradient flow") {
  Tensor<double> x({2}, {1.0, 2.0});
  x.set_requires_grad(true);
  {
    GradTape<double> tape;
    Tensor<double> loss = sum_all(mul(detach(x), x));
    tape.backward(loss);
  }
  // only the tracked operand contributes: d/dx (c * x) = c
  CHECK(x.grad()[0] == 1.0);
  CHECK(x.grad()[1] == 2.0);
}

TEST_CASE("no active tape means no recording") {
  Tensor<double> x({2}, {1.0, 2.0});
  x.set_requires_grad(true);
  Tensor<double> out = mul(x, x);
  CHECK(out.valid());
  CHECK(GradTape<double>::active() == nullptr);
}

TEST_CASE("untracked inputs stay grad-free through a taped pass") {
  Tensor<double> x({2}, {1.0, 2.0});
  Tensor<double> y({2}, {3.0, 4.0});
  x.set_requires_grad(true);
  {
    GradTape<double> tape;
    tape.backward(sum_all(mul(x, y)));
  }
  CHECK(x.grad() != nullptr);
  CHECK(y.grad() == nullptr);
}
