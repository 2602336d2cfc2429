// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psstl/param.hpp"

namespace psstl {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed parameter list. Moment buffers are
/// created zeroed on the first step; the list must not change afterwards.
class Adam {
 public:
  explicit Adam(AdamOptions options) : options_(options) {}

  /// Applies one update in place and zeroes the gradients. Throws
  /// NumericError naming the first parameter with a non-finite gradient;
  /// in that case no parameter is modified.
  void step(std::span<Param* const> params);

  std::int64_t steps_taken() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return options_; }

 private:
  AdamOptions options_;
  std::int64_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace psstl
