// SPDX-License-Identifier: Apache-2.0
#include "psstl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "psstl/errors.hpp"
#include "psstl/rng.hpp"

namespace psstl {

void validate_synth_params(const SynthParams& p) {
  auto fail = [](const std::string& msg) { throw ParameterError("synth: " + msg); };
  if (p.n_news == 0) fail("n_news must be >= 1");
  if (p.feature_dim == 0) fail("feature_dim must be >= 1");
  if (!(p.q_out >= 0.0 && p.q_out <= p.q_in && p.q_in <= 1.0)) {
    fail("need 0 <= q_out <= q_in <= 1");
  }
  if (p.tree_size_min < 1) fail("tree_size_min must be >= 1");
  if (p.tree_size_max < p.tree_size_min) fail("tree_size_max must be >= tree_size_min");
  if (!(p.feature_noise_std >= 0.0)) fail("feature_noise_std must be >= 0");
}

namespace {

std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06zu", prefix, i);
  return buf;
}

}  // namespace

Dataset generate_synthetic(const SynthParams& p) {
  validate_synth_params(p);
  Rng rng(p.seed);
  const std::size_t d = p.feature_dim;
  const double mu = 1.0 / std::sqrt(static_cast<double>(d));
  const std::size_t n_zero = (p.n_news + 1) / 2;
  const std::size_t community0 = p.n_users / 2;

  Dataset ds;
  ds.feature_dim = d;
  ds.samples.reserve(p.n_news);
  for (std::size_t i = 0; i < p.n_news; ++i) {
    NewsSample s;
    s.id = padded_id("news-", i);
    s.label = i < n_zero ? 0 : 1;

    for (std::size_t u = 0; u < p.n_users; ++u) {
      const int community = u < community0 ? 0 : 1;
      const double q = community == s.label ? p.q_in : p.q_out;
      if (!rng.bernoulli(q)) continue;
      int count = 1;
      while (count < 5 && rng.bernoulli(0.5)) ++count;
      s.engagements.push_back({padded_id("user-", u), count});
    }

    const std::size_t span = p.tree_size_max - p.tree_size_min + 1;
    const std::size_t n_nodes = p.tree_size_min + static_cast<std::size_t>(rng.uniform_index(span));
    const double sign = s.label == 0 ? 1.0 : -1.0;
    s.news_feature.resize(d);
    for (double& v : s.news_feature) v = sign * mu + p.feature_noise_std * rng.normal();
    s.node_features.push_back(s.news_feature);
    for (std::size_t k = 1; k < n_nodes; ++k) {
      s.edges.push_back({static_cast<std::size_t>(rng.uniform_index(k)), k});
      std::vector<double> f(d);
      for (std::size_t j = 0; j < d; ++j) {
        f[j] = 0.5 * s.news_feature[j] + 0.5 * p.feature_noise_std * rng.normal();
      }
      s.node_features.push_back(std::move(f));
    }
    ds.samples.push_back(std::move(s));
  }
  rng.shuffle(std::span<NewsSample>(ds.samples));
  ds.rebuild_user_index();
  require_valid(ds);
  return ds;
}

}  // namespace psstl
