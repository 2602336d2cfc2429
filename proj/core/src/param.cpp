// SPDX-License-Identifier: Apache-2.0
#include "psstl/param.hpp"

#include <cmath>
#include <set>

#include "psstl/errors.hpp"

namespace psstl {

Param::Param(std::string name_, Matrix value_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.rows(), value.cols()) {}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-limit, limit);
  return m;
}

void zero_grads(std::span<Param* const> params) {
  for (Param* p : params) p->zero_grad();
}

void require_unique_names(std::span<Param* const> params) {
  std::set<std::string> seen;
  for (const Param* p : params) {
    if (!seen.insert(p->name).second) throw ValidationError("duplicate parameter name " + p->name);
  }
}

std::vector<Matrix> snapshot_values(std::span<Param* const> params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const Param* p : params) out.push_back(p->value);
  return out;
}

void restore_values(std::span<Param* const> params, const std::vector<Matrix>& values) {
  if (values.size() != params.size()) throw DimensionError("restore_values: count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(params[i]->value, values[i], "restore_values");
    params[i]->value = values[i];
  }
}

}  // namespace psstl
