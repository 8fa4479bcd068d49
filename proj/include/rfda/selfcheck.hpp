#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rfda {

struct SuiteResult {
  std::string name;
  int passed = 0, failed = 0;
  std::vector<std::string> failures;

  bool ok() const { return failed == 0; }
  void note(bool good, const std::string& what) {
    if (good) {
      ++passed;
    } else {
      ++failed;
      failures.push_back(what);
    }
  }
};

// Deterministic self-test suites shared by the `check` subcommand and the
// test harness.  Each returns per-check pass/fail counts; seeds pin the
// random cases.

// deform_conv2d with zero offsets against plain conv2d, 100 random shapes.
SuiteResult check_kernel_equivalence(std::uint64_t seed = 1);

// Central-difference audit of every differentiable op (64-bit, h = 1e-4).
SuiteResult check_op_gradients(std::uint64_t seed = 1);

// Same audit of the full fuse/recurse/enhance loss on an 8-frame 24x24 clip
// against a sampled fraction of the small-preset parameters.
SuiteResult check_pipeline_gradient(std::uint64_t seed = 1, double fraction = 0.01);

// Recurrence step contracts: first-frame pass-through, zero-beta identity,
// residual linear in beta.
SuiteResult check_recurrence_contracts(std::uint64_t seed = 1);

// Attention block contracts: masks/channel weights strictly inside (0,1),
// zeroed attention path collapses to 0.25*x, head layer-count audit.
SuiteResult check_attention_contracts(std::uint64_t seed = 1);

// Streaming enhancement against the two-pass reference, bit for bit.
SuiteResult check_streaming_equivalence(std::uint64_t seed = 1, int clips = 20);

// Closed-form metric values (PSNR, SSIM, curve-stability statistics).
SuiteResult check_metric_oracles();

// Weight-file round trip plus structured failure on truncated files.
SuiteResult check_serialization(std::uint64_t seed = 1);

std::vector<SuiteResult> run_all_checks(std::uint64_t seed = 1);

}  // namespace rfda
