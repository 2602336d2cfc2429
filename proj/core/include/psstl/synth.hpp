// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

#include "psstl/dataset.hpp"

namespace psstl {

/// Planted-community generator settings. Users are split into two equal
/// communities aligned with the two labels; a news item of class c draws
/// engagement from community-c users with probability q_in and from the
/// other community with probability q_out.
struct SynthParams {
  std::size_t n_news = 200;
  std::size_t n_users = 500;
  double q_in = 0.05;
  double q_out = 0.005;
  std::size_t tree_size_min = 3;
  std::size_t tree_size_max = 12;
  std::size_t feature_dim = 16;
  double feature_noise_std = 1.0;
  std::uint64_t seed = 1;
};

/// Throws ParameterError on any out-of-range field.
void validate_synth_params(const SynthParams& p);

/// Generates a balanced, validated dataset:
///  - labels ceil(n/2) zeros then floor(n/2) ones, then the sample order is
///    shuffled (ids keep their generation index);
///  - engagement count = 1 + Geometric(0.5) failures, capped at 5;
///  - random recursive tree with U[min, max] nodes (uniform parent choice);
///  - root = mu_c + N(0, sigma^2 I) with mu_0 = +1/sqrt(d), mu_1 = -1/sqrt(d);
///    comment = 0.5 * root + 0.5 * N(0, sigma^2 I).
Dataset generate_synthetic(const SynthParams& p);

}  // namespace psstl
