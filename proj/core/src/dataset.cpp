// SPDX-License-Identifier: Apache-2.0
#include "psstl/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psstl/errors.hpp"
#include "psstl/rng.hpp"
#include "psstl/text_format.hpp"

namespace psstl {

using nlohmann::json;

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

void Dataset::rebuild_user_index() {
  std::set<std::string> users;
  for (const auto& s : samples)
    for (const auto& e : s.engagements) users.insert(e.user);
  user_index.clear();
  std::size_t col = 0;
  for (const auto& u : users) user_index.emplace(u, col++);
}

namespace {

// Forest check on an arbitrary edge list: every node has at most one parent
// and following parents never revisits a node.
bool is_forest(const NewsSample& s) {
  const std::size_t n = s.node_count();
  std::vector<std::ptrdiff_t> parent(n, -1);
  for (const auto& e : s.edges) {
    if (e.parent == e.child) return false;
    if (parent[e.child] != -1) return false;
    parent[e.child] = static_cast<std::ptrdiff_t>(e.parent);
  }
  // 0 = unvisited, 1 = on current path, 2 = done
  std::vector<int> state(n, 0);
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::size_t> path;
    std::ptrdiff_t v = static_cast<std::ptrdiff_t>(start);
    while (v != -1 && state[static_cast<std::size_t>(v)] == 0) {
      state[static_cast<std::size_t>(v)] = 1;
      path.push_back(static_cast<std::size_t>(v));
      v = parent[static_cast<std::size_t>(v)];
    }
    if (v != -1 && state[static_cast<std::size_t>(v)] == 1) return false;
    for (std::size_t p : path) state[p] = 2;
  }
  return true;
}

}  // namespace

std::vector<Violation> validate_dataset(const Dataset& ds) {
  std::vector<Violation> out;
  auto add = [&](const NewsSample& s, std::string rule, std::string detail) {
    out.push_back({s.id, std::move(rule), std::move(detail)});
  };
  std::set<std::string> users;
  for (const auto& s : ds.samples) {
    if (s.label != 0 && s.label != 1) {
      add(s, "label domain violated", "label " + std::to_string(s.label) + " not in {0,1}");
    }
    if (s.node_features.empty()) {
      add(s, "empty node list", "sample has no nodes");
    }
    bool dims_ok = s.news_feature.size() == ds.feature_dim;
    for (const auto& f : s.node_features) dims_ok = dims_ok && f.size() == ds.feature_dim;
    if (!dims_ok) {
      add(s, "dimension uniformity violated",
          "feature vectors must all have length " + std::to_string(ds.feature_dim));
    } else if (!s.node_features.empty() && s.node_features[0] != s.news_feature) {
      add(s, "root feature mismatch", "node_features[0] differs from news_feature");
    }
    bool edges_in_range = true;
    for (const auto& e : s.edges) {
      if (e.parent >= s.node_count() || e.child >= s.node_count()) {
        add(s, "edge index out of range",
            "edge (" + std::to_string(e.parent) + "," + std::to_string(e.child) + ") with " +
                std::to_string(s.node_count()) + " nodes");
        edges_in_range = false;
        break;
      }
    }
    if (edges_in_range && !is_forest(s)) {
      add(s, "forest violated", "edges contain a cycle, self-loop, or multiple parents");
    }
    for (const auto& e : s.engagements) {
      if (e.count < 1) {
        add(s, "count >= 1 violated",
            "user " + e.user + " has count " + std::to_string(e.count));
      }
      users.insert(e.user);
    }
  }
  bool index_ok = ds.user_index.size() == users.size();
  if (index_ok) {
    for (const auto& u : users) index_ok = index_ok && ds.user_index.contains(u);
  }
  if (!index_ok) {
    out.push_back({"", "user index mismatch",
                   "user_index must cover exactly the engagement user ids"});
  }
  return out;
}

void require_valid(const Dataset& ds) {
  const auto report = validate_dataset(ds);
  if (!report.empty()) {
    const auto& v = report.front();
    throw ValidationError("sample '" + v.sample_id + "': " + v.rule + " (" + v.detail + ")");
  }
}

namespace {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void parse_fail(std::string_view source, std::size_t line, const std::string& what) {
  throw ParseError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

std::vector<double> to_vector(const json& j) {
  if (!j.is_array()) throw SchemaError("expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw SchemaError("expected a number");
    out.push_back(v.get<double>());
  }
  return out;
}

NewsSample sample_from_json(const json& j) {
  static const std::set<std::string> kKeys = {"id",    "label",      "news_feature",
                                              "node_features", "edges", "engagements"};
  if (!j.is_object()) throw SchemaError("sample must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw SchemaError("unknown key '" + key + "'");
  }
  NewsSample s;
  s.id = j.at("id").get<std::string>();
  s.label = j.at("label").get<int>();
  s.news_feature = to_vector(j.at("news_feature"));
  for (const auto& row : j.at("node_features")) s.node_features.push_back(to_vector(row));
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) {
      throw SchemaError("edge must be [parent, child]");
    }
    s.edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
  }
  for (const auto& e : j.at("engagements")) {
    if (!e.is_array() || e.size() != 2) {
      throw SchemaError("engagement must be [user, count]");
    }
    s.engagements.push_back({e[0].get<std::string>(), e[1].get<int>()});
  }
  return s;
}

void append_vector(std::string& out, const std::vector<double>& v) {
  out.push_back('[');
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += format_exact(v[i]);
  }
  out.push_back(']');
}

}  // namespace

Dataset read_dataset(std::istream& in, std::string_view source, bool validate) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      parse_fail(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        if (!j.is_object() || j.value("format", "") != kDatasetFormat) {
          parse_fail(source, line_no, "missing pssd-v1 header");
        }
        ds.feature_dim = j.at("feature_dim").get<std::size_t>();
        have_header = true;
        continue;
      }
      ds.samples.push_back(sample_from_json(j));
    } catch (const json::exception& e) {
      parse_fail(source, line_no, e.what());
    } catch (const SchemaError& e) {
      parse_fail(source, line_no, e.what());
    }
  }
  if (!have_header) parse_fail(source, line_no, "empty file; expected pssd-v1 header");
  ds.rebuild_user_index();
  if (validate) require_valid(ds);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, bool validate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return read_dataset(in, path.string(), validate);
}

void write_dataset(const Dataset& ds, std::ostream& out) { out << serialize_dataset(ds); }

std::string serialize_dataset(const Dataset& ds) {
  std::string out = "{\"format\":\"pssd-v1\",\"feature_dim\":" + std::to_string(ds.feature_dim) +
                    "}\n";
  for (const auto& s : ds.samples) {
    out += "{\"id\":" + json_quote(s.id) + ",\"label\":" + std::to_string(s.label) +
           ",\"news_feature\":";
    append_vector(out, s.news_feature);
    out += ",\"node_features\":[";
    for (std::size_t i = 0; i < s.node_features.size(); ++i) {
      if (i) out.push_back(',');
      append_vector(out, s.node_features[i]);
    }
    out += "],\"edges\":[";
    for (std::size_t i = 0; i < s.edges.size(); ++i) {
      if (i) out.push_back(',');
      out += "[" + std::to_string(s.edges[i].parent) + "," + std::to_string(s.edges[i].child) +
             "]";
    }
    out += "],\"engagements\":[";
    for (std::size_t i = 0; i < s.engagements.size(); ++i) {
      if (i) out.push_back(',');
      out += "[" + json_quote(s.engagements[i].user) + "," +
             std::to_string(s.engagements[i].count) + "]";
    }
    out += "]}\n";
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset " + path.string());
  write_dataset(ds, out);
  if (!out) throw IoError("write failed for " + path.string());
}

Split split_dataset(std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 10) {
    throw ParameterError("split_dataset: need at least 10 samples, got " +
                         std::to_string(n_samples));
  }
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  // Integer arithmetic keeps floor(0.7N) exact.
  const std::size_t n_train = (n_samples * 7) / 10;
  const std::size_t n_val = n_samples / 10;
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

}  // namespace psstl
