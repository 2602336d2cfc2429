// SPDX-License-Identifier: Apache-2.0
#include "psstl/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "psstl/errors.hpp"
#include "psstl/text_format.hpp"

namespace psstl {

std::string serialize_checkpoint(const std::string& model, const std::string& config_hash,
                                 std::uint64_t seed, std::span<Param* const> params) {
  require_unique_names(params);
  std::vector<const Param*> sorted(params.begin(), params.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Param* a, const Param* b) { return a->name < b->name; });
  std::string out = "{\"model\":" + json_quote(model) +
                    ",\"config_hash\":" + json_quote(config_hash) +
                    ",\"seed\":" + std::to_string(seed) + ",\"params\":{";
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const Param& p = *sorted[k];
    if (k) out += ",";
    out += json_quote(p.name) + ":{\"shape\":[" + std::to_string(p.value.rows()) + "," +
           std::to_string(p.value.cols()) + "],\"data\":[";
    const auto d = p.value.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (i) out += ",";
      out += format_exact(d[i]);
    }
    out += "]}";
  }
  out += "}}\n";
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::string& model,
                     const std::string& config_hash, std::uint64_t seed,
                     std::span<Param* const> params) {
  const std::string text = serialize_checkpoint(model, config_hash, seed, params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

CheckpointInfo load_checkpoint(const std::filesystem::path& path, const std::string& model,
                               std::span<Param* const> params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  CheckpointInfo info;
  try {
    info.model = j.at("model").get<std::string>();
    info.config_hash = j.at("config_hash").get<std::string>();
    info.seed = j.at("seed").get<std::uint64_t>();
    if (info.model != model) {
      throw ValidationError(path.string() + ": checkpoint holds a '" + info.model +
                            "' model, expected '" + model + "'");
    }
    const auto& stored = j.at("params");
    for (Param* p : params) {
      if (!stored.contains(p->name)) {
        throw ValidationError(path.string() + ": missing parameter " + p->name);
      }
      const auto& entry = stored.at(p->name);
      const auto rows = entry.at("shape").at(0).get<std::size_t>();
      const auto cols = entry.at("shape").at(1).get<std::size_t>();
      if (rows != p->value.rows() || cols != p->value.cols()) {
        throw ValidationError(path.string() + ": parameter " + p->name + " has shape " +
                             std::to_string(rows) + "x" + std::to_string(cols) + ", expected " +
                             p->value.shape_string());
      }
      p->value = Matrix(rows, cols, entry.at("data").get<std::vector<double>>());
      p->zero_grad();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return info;
}

}  // namespace psstl
