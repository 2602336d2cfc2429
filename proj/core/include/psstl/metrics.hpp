// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psstl {

/// Fraction of positions where preds == labels.
double accuracy(std::span<const int> preds, std::span<const int> labels);

/// Unweighted mean of the per-class F1 over classes {0, 1}. A class absent
/// from both preds and labels contributes F1 = 0.
double macro_f1(std::span<const int> preds, std::span<const int> labels);

/// Selects entries at the given indices.
std::vector<int> select(std::span<const int> values, std::span<const std::size_t> indices);

struct EvalMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

EvalMetrics evaluate(std::span<const int> preds, std::span<const int> labels,
                     std::span<const std::size_t> indices);

}  // namespace psstl
