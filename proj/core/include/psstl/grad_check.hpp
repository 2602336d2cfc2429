// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "psstl/param.hpp"

namespace psstl {

/// Scalar objective over a parameter list. When called with
/// `accumulate_grad = true` it must also add its analytic gradient into each
/// Param::grad.
using Objective = std::function<double(bool accumulate_grad)>;

struct GradCheckOptions {
  double h = 1e-5;
  /// Coordinates checked per parameter; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
  /// Optional fingerprint of every ReLU on/off state at the current
  /// parameters. When set, a coordinate whose +h or -h evaluation changes
  /// the fingerprint straddles a kink and is skipped.
  std::function<std::uint64_t()> activation_signature;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
  std::size_t coords_skipped = 0;
};

/// Central finite differences vs the analytic gradient. The per-coordinate
/// error is |a - n| / max(1e-8, |a| + |n|); the report holds the maximum.
/// Parameter values are restored on return.
GradCheckReport grad_check(std::span<Param* const> params, const Objective& objective,
                           const GradCheckOptions& options = {});

}  // namespace psstl
