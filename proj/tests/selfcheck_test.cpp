#include <string>

#include "doctest.h"
#include "rfda/selfcheck.hpp"

using namespace rfda;

namespace {
void expect_clean(const SuiteResult& r) {
  std::string all = r.name;
  for (const std::string& f : r.failures) all += "\n  " + f;
  INFO(all);
  CHECK(r.failed == 0);
  CHECK(r.passed > 0);
}
}  // namespace

TEST_CASE("zero-offset deformable conv matches plain conv") {
  expect_clean(check_kernel_equivalence(1));
}
TEST_CASE("every op passes the finite-difference audit") {
  expect_clean(check_op_gradients(1));
}
TEST_CASE("recurrence step contracts") { expect_clean(check_recurrence_contracts(1)); }
TEST_CASE("attention block contracts") { expect_clean(check_attention_contracts(1)); }
TEST_CASE("streaming equals two-pass enhancement") {
  expect_clean(check_streaming_equivalence(1, 20));
}
TEST_CASE("metric oracle values") { expect_clean(check_metric_oracles()); }
TEST_CASE("weight serialization suite") { expect_clean(check_serialization(1)); }
