// SPDX-License-Identifier: Apache-2.0
#include "psstl/metrics.hpp"

#include <string>

#include "psstl/errors.hpp"

namespace psstl {

namespace {

void require_pairs(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw DimensionError("metrics: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(labels.size()) + " labels");
  }
  if (preds.empty()) throw ParameterError("metrics: empty input");
}

}  // namespace

double accuracy(std::span<const int> preds, std::span<const int> labels) {
  require_pairs(preds, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double macro_f1(std::span<const int> preds, std::span<const int> labels) {
  require_pairs(preds, labels);
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool p = preds[i] == c;
      const bool l = labels[i] == c;
      tp += (p && l) ? 1 : 0;
      fp += (p && !l) ? 1 : 0;
      fn += (!p && l) ? 1 : 0;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    if (denom != 0) sum += 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / 2.0;
}

std::vector<int> select(std::span<const int> values, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= values.size()) throw DimensionError("select: index out of range");
    out.push_back(values[i]);
  }
  return out;
}

EvalMetrics evaluate(std::span<const int> preds, std::span<const int> labels,
                     std::span<const std::size_t> indices) {
  const auto p = select(preds, indices);
  const auto l = select(labels, indices);
  return {accuracy(p, l), macro_f1(p, l)};
}

}  // namespace psstl
