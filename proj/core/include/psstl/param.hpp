// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "psstl/matrix.hpp"
#include "psstl/rng.hpp"

namespace psstl {

/// A trainable tensor and its gradient accumulator (same shape).
struct Param {
  Param() = default;
  Param(std::string name, Matrix value);

  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.fill(0.0); }
  bool operator==(const Param& other) const = default;
};

using ParamList = std::vector<Param*>;

/// Uniform on [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))] with
/// fan_in = rows, fan_out = cols.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

void zero_grads(std::span<Param* const> params);
/// Throws ValidationError if two params share a name.
void require_unique_names(std::span<Param* const> params);
/// Deep copy of the values only, in list order.
std::vector<Matrix> snapshot_values(std::span<Param* const> params);
void restore_values(std::span<Param* const> params, const std::vector<Matrix>& values);

}  // namespace psstl
