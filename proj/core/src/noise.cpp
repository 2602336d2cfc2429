// SPDX-License-Identifier: Apache-2.0
#include "psstl/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "psstl/errors.hpp"
#include "psstl/rng.hpp"

namespace psstl {

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::semantic: return "semantic";
    case NoiseKind::structural: return "structural";
    case NoiseKind::mixed: return "mixed";
  }
  return "?";
}

std::string_view to_string(NoiseScope scope) {
  return scope == NoiseScope::all ? "all" : "test";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view s) {
  if (s == "semantic") return NoiseKind::semantic;
  if (s == "structural") return NoiseKind::structural;
  if (s == "mixed") return NoiseKind::mixed;
  return std::nullopt;
}

std::optional<NoiseScope> parse_noise_scope(std::string_view s) {
  if (s == "all") return NoiseScope::all;
  if (s == "test") return NoiseScope::test;
  return std::nullopt;
}

namespace {

void require_ratio(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ParameterError("noise ratio must be in [0,1]");
}

}  // namespace

std::size_t masked_count(double ratio, std::size_t n) {
  require_ratio(ratio);
  const auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  return std::min(k, n);
}

namespace {

// First k entries of a seeded Fisher-Yates permutation of 0..n-1, sorted.
std::vector<std::size_t> choose(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> resolve_targets(const Dataset& ds, std::span<const std::size_t> targets) {
  if (!targets.empty()) return {targets.begin(), targets.end()};
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace

Dataset inject_semantic(const Dataset& ds, const NoiseSpec& spec,
                        std::span<const std::size_t> targets) {
  require_ratio(spec.ratio);
  Dataset out = ds;
  if (spec.ratio == 0.0) return out;
  for (std::size_t i : resolve_targets(ds, targets)) {
    NewsSample& s = out.samples.at(i);
    const std::size_t k = masked_count(spec.ratio, s.node_count());
    const auto seed = derive_seed(spec.seed, "noise/semantic/" + s.id);
    for (std::size_t node : choose(s.node_count(), k, seed)) {
      std::fill(s.node_features[node].begin(), s.node_features[node].end(), 0.0);
      if (node == 0) std::fill(s.news_feature.begin(), s.news_feature.end(), 0.0);
    }
  }
  return out;
}

Dataset inject_structural(const Dataset& ds, const NoiseSpec& spec,
                          std::span<const std::size_t> targets) {
  require_ratio(spec.ratio);
  Dataset out = ds;
  if (spec.ratio == 0.0) return out;
  for (std::size_t i : resolve_targets(ds, targets)) {
    NewsSample& s = out.samples.at(i);
    const std::size_t k = masked_count(spec.ratio, s.edges.size());
    const auto seed = derive_seed(spec.seed, "noise/structural/" + s.id);
    const auto removed = choose(s.edges.size(), k, seed);
    std::vector<Edge> kept;
    kept.reserve(s.edges.size() - k);
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
      if (!std::binary_search(removed.begin(), removed.end(), e)) kept.push_back(s.edges[e]);
    }
    s.edges = std::move(kept);
  }
  return out;
}

Dataset apply_noise(const Dataset& ds, const NoiseSpec& spec, const Split& split) {
  std::span<const std::size_t> targets;
  if (spec.scope == NoiseScope::test) {
    if (split.test.empty()) return ds;
    targets = split.test;
  }
  switch (spec.kind) {
    case NoiseKind::semantic: return inject_semantic(ds, spec, targets);
    case NoiseKind::structural: return inject_structural(ds, spec, targets);
    case NoiseKind::mixed: return inject_structural(inject_semantic(ds, spec, targets), spec, targets);
  }
  return ds;
}

}  // namespace psstl
