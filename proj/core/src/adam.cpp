// SPDX-License-Identifier: Apache-2.0
#include "psstl/adam.hpp"

#include <cmath>

#include "psstl/errors.hpp"

namespace psstl {

void Adam::step(std::span<Param* const> params) {
  for (const Param* p : params) {
    if (!all_finite(p->grad)) {
      throw NumericError("adam: non-finite gradient in parameter '" + p->name + "' at step " +
                         std::to_string(t_ + 1));
    }
  }
  if (t_ == 0) {
    m_.clear();
    v_.clear();
    for (const Param* p : params) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  } else if (m_.size() != params.size()) {
    throw DimensionError("adam: parameter list changed between steps");
  }
  ++t_;
  const auto& o = options_;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    require_same_shape(p.value, m_[k], "adam");
    auto w = p.value.data();
    auto g = p.grad.data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
    p.zero_grad();
  }
}

}  // namespace psstl
