// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace psstl {

/// Directed interaction in a propagation tree (parent -> child).
struct Edge {
  std::size_t parent = 0;
  std::size_t child = 0;
  bool operator==(const Edge&) const = default;
};

/// A user's engagement with one news item; count is the number of times.
struct Engagement {
  std::string user;
  int count = 1;
  bool operator==(const Engagement&) const = default;
};

/// One labelled news item with its propagation tree.
///
/// Node 0 is the news root, so node_features[0] must equal news_feature.
/// Labels: 0 = true news, 1 = fake news.
struct NewsSample {
  std::string id;
  int label = 0;
  std::vector<double> news_feature;
  std::vector<std::vector<double>> node_features;
  std::vector<Edge> edges;
  std::vector<Engagement> engagements;

  std::size_t node_count() const noexcept { return node_features.size(); }
  bool operator==(const NewsSample&) const = default;
};

struct Dataset {
  std::size_t feature_dim = 0;
  std::vector<NewsSample> samples;
  /// user id -> column of the engagement matrix; ids sorted ascending.
  std::map<std::string, std::size_t> user_index;

  std::size_t size() const noexcept { return samples.size(); }
  std::vector<int> labels() const;
  /// Recomputes user_index from the union of engagement user ids.
  void rebuild_user_index();

  bool operator==(const Dataset&) const = default;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  bool operator==(const Split&) const = default;
};

struct Violation {
  std::string sample_id;
  std::string rule;
  std::string detail;
  bool operator==(const Violation&) const = default;
};

inline constexpr std::string_view kDatasetFormat = "pssd-v1";

/// All schema violations, in sample order; empty when the dataset is valid.
/// Rule strings: "dimension uniformity violated", "root feature mismatch",
/// "label domain violated", "edge index out of range", "forest violated",
/// "count >= 1 violated", "empty node list", "user index mismatch".
std::vector<Violation> validate_dataset(const Dataset& ds);
/// Throws ValidationError describing the first violation, if any.
void require_valid(const Dataset& ds);

/// Reads pssd-v1 JSONL. Throws ParseError (with line number) on malformed
/// input and ValidationError when the content violates the schema, unless
/// `validate` is false (the caller then runs validate_dataset itself).
Dataset read_dataset(std::istream& in, std::string_view source = "<stream>",
                     bool validate = true);
Dataset load_dataset(const std::filesystem::path& path, bool validate = true);

/// Writes pssd-v1 JSONL. Doubles use 17 significant digits, so a reload is
/// bit-exact and repeated saves are byte-identical.
void write_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
std::string serialize_dataset(const Dataset& ds);

/// Seeded Fisher-Yates permutation cut 7:1:2 as floor(0.7N) / floor(0.1N) /
/// remainder. Requires N >= 10.
Split split_dataset(std::size_t n_samples, std::uint64_t seed);
inline Split split_dataset(const Dataset& ds, std::uint64_t seed) {
  return split_dataset(ds.size(), seed);
}

}  // namespace psstl
