// SPDX-License-Identifier: Apache-2.0
#include "psstl/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "psstl/errors.hpp"

namespace psstl {

GradCheckReport grad_check(std::span<Param* const> params, const Objective& objective,
                           const GradCheckOptions& options) {
  if (!(options.h > 0.0)) throw ParameterError("grad_check: h must be > 0");
  zero_grads(params);
  objective(true);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const Param* p : params) analytic.push_back(p->grad);
  zero_grads(params);

  const bool track_kinks = static_cast<bool>(options.activation_signature);
  const std::uint64_t base_signature = track_kinks ? options.activation_signature() : 0;

  Rng rng(options.seed);
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    const std::size_t n = p.value.size();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param != 0 && options.max_coords_per_param < n) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    auto w = p.value.data();
    for (std::size_t i : coords) {
      const double saved = w[i];
      bool crosses_kink = false;
      w[i] = saved + options.h;
      const double up = objective(false);
      if (track_kinks) crosses_kink = options.activation_signature() != base_signature;
      w[i] = saved - options.h;
      const double down = objective(false);
      if (track_kinks && !crosses_kink) {
        crosses_kink = options.activation_signature() != base_signature;
      }
      w[i] = saved;
      if (crosses_kink) {
        ++report.coords_skipped;
        continue;
      }
      const double numeric = (up - down) / (2.0 * options.h);
      const double a = analytic[k].data()[i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++report.coords_checked;
      if (report.worst_param.empty() || err > report.max_rel_err) {
        report.max_rel_err = err;
        report.worst_param = p.name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace psstl
