// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "psstl/dataset.hpp"

namespace psstl {

enum class NoiseKind { semantic, structural, mixed };
enum class NoiseScope { all, test };

std::string_view to_string(NoiseKind kind);
std::string_view to_string(NoiseScope scope);
std::optional<NoiseKind> parse_noise_kind(std::string_view s);
std::optional<NoiseScope> parse_noise_scope(std::string_view s);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::mixed;
  double ratio = 0.0;
  NoiseScope scope = NoiseScope::all;
  std::uint64_t seed = 0;
};

/// floor(ratio * n), robust to representation error (0.29 * 100 = 29).
std::size_t masked_count(double ratio, std::size_t n);

/// Zeroes the feature vectors of exactly masked_count(ratio, n_nodes) nodes
/// per targeted sample, chosen without replacement from a stream seeded by
/// (spec.seed, sample id). A masked root also zeroes news_feature.
/// `targets` selects sample indices; empty span means every sample.
Dataset inject_semantic(const Dataset& ds, const NoiseSpec& spec,
                        std::span<const std::size_t> targets = {});

/// Removes exactly masked_count(ratio, n_edges) edges per targeted sample.
/// The remaining edges are kept in their original order.
Dataset inject_structural(const Dataset& ds, const NoiseSpec& spec,
                          std::span<const std::size_t> targets = {});

/// Applies spec.kind (mixed = semantic then structural) to the samples in
/// spec.scope. The engagement data is never touched.
Dataset apply_noise(const Dataset& ds, const NoiseSpec& spec, const Split& split);

}  // namespace psstl
