// SPDX-License-Identifier: Apache-2.0
#include "psstl/fixture.hpp"

#include <cmath>

#include "psstl/rng.hpp"

namespace psstl {

Dataset fixture_dataset() {
  struct Spec {
    const char* id;
    int label;
    std::size_t nodes;
    std::vector<Edge> edges;
    std::vector<Engagement> engagements;
  };
  const std::vector<Spec> specs = {
      {"fx-0", 0, 3, {{0, 1}, {0, 2}}, {{"alice", 2}, {"bob", 1}}},
      {"fx-1", 0, 4, {{0, 1}, {1, 2}, {1, 3}}, {{"alice", 1}}},
      {"fx-2", 0, 1, {}, {{"alice", 3}, {"carol", 1}}},
      {"fx-3", 1, 2, {{0, 1}}, {{"bob", 2}, {"carol", 1}}},
      {"fx-4", 1, 4, {{0, 1}, {0, 2}, {0, 3}}, {{"carol", 2}}},
      {"fx-5", 1, 3, {{0, 1}, {1, 2}}, {{"bob", 1}, {"carol", 3}}},
  };
  // Features are rounded to 1/64 so the JSONL file stays short and exact.
  Rng rng(20240601);
  auto draw = [&](double centre) {
    return std::round((centre + 0.5 * rng.normal()) * 64.0) / 64.0;
  };
  Dataset ds;
  ds.feature_dim = 4;
  for (const auto& s : specs) {
    NewsSample n;
    n.id = s.id;
    n.label = s.label;
    const double centre = s.label == 0 ? 0.5 : -0.5;
    for (std::size_t k = 0; k < s.nodes; ++k) {
      std::vector<double> f(ds.feature_dim);
      for (double& v : f) v = draw(k == 0 ? centre : 0.5 * centre);
      n.node_features.push_back(std::move(f));
    }
    n.news_feature = n.node_features[0];
    n.edges = s.edges;
    n.engagements = s.engagements;
    ds.samples.push_back(std::move(n));
  }
  ds.rebuild_user_index();
  return ds;
}

}  // namespace psstl
