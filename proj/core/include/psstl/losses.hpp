// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

#include "psstl/matrix.hpp"

namespace psstl {

/// A scalar loss together with its gradient w.r.t. the first argument.
struct LossGrad {
  double value = 0.0;
  Matrix grad;
};

inline constexpr double kKlClampFloor = 1e-12;

/// Row-wise softmax(z / temperature), max-subtracted.
Matrix softmax_rows(const Matrix& z, double temperature = 1.0);
/// Row-wise log-softmax(z / temperature), computed with log-sum-exp.
Matrix log_softmax_rows(const Matrix& z, double temperature = 1.0);

/// Mean over rows of sum_i p_i ln(p_i / q_i). Terms with p_i = 0 contribute 0
/// and q is clamped below at kKlClampFloor. Rows must be distributions.
double kl_rows(const Matrix& p, const Matrix& q);

/// Mean over masked rows of -ln softmax(logits)[label]. The gradient is
/// (softmax - onehot) / |mask| on masked rows and zero elsewhere.
LossGrad cross_entropy(const Matrix& logits, std::span<const int> labels,
                       std::span<const std::size_t> mask);

/// Row argmax, ties broken towards the lowest index.
std::vector<int> argmax_rows(const Matrix& z);

}  // namespace psstl
