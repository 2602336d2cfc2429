// SPDX-License-Identifier: Apache-2.0
#include "psstl/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psstl/errors.hpp"
#include "psstl/rng.hpp"
#include "psstl/text_format.hpp"

namespace psstl {

using nlohmann::json;

std::string_view to_string(Pooling pooling) { return pooling == Pooling::mean ? "mean" : "root"; }

void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (c.hidden_dim == 0) fail("hidden_dim", "must be >= 1");
  if (c.pe_dim == 0) fail("pe_dim", "must be >= 1");
  if (c.refiner_hidden == 0) fail("refiner_hidden", "must be >= 1");
  if (!(c.lr_ct > 0.0)) fail("lr_ct", "must be > 0");
  if (!(c.lr_pt > 0.0)) fail("lr_pt", "must be > 0");
  if (!(c.lr_student > 0.0)) fail("lr_student", "must be > 0");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) fail("lambda", "must be in [0,1]");
  if (!(c.beta >= 0.0 && c.beta <= 1.0)) fail("beta", "must be in [0,1]");
  if (!(c.rho > 0.0)) fail("rho", "must be > 0");
  if (!(c.noise_ratio >= 0.0 && c.noise_ratio <= 1.0)) fail("noise_ratio", "must be in [0,1]");
  if (c.patience == 0) fail("patience", "must be >= 1");
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "': wrong value type");
  }
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "': expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("config key '" + key + "': expected true/false");
  return v.get<bool>();
}

void apply_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "data") c.data = get_as<std::string>(v, key);
    else if (key == "out") c.out = get_as<std::string>(v, key);
    else if (key == "hidden_dim") c.hidden_dim = get_count(v, key);
    else if (key == "pe_dim") c.pe_dim = get_count(v, key);
    else if (key == "refiner_hidden") c.refiner_hidden = get_count(v, key);
    else if (key == "lr_ct") c.lr_ct = get_number(v, key);
    else if (key == "lr_pt") c.lr_pt = get_number(v, key);
    else if (key == "lr_student") c.lr_student = get_number(v, key);
    else if (key == "lambda") c.lambda = get_number(v, key);
    else if (key == "beta") c.beta = get_number(v, key);
    else if (key == "rho") c.rho = get_number(v, key);
    else if (key == "final_relu") c.final_relu = get_bool(v, key);
    else if (key == "kd_reverse_kl") c.kd_reverse_kl = get_bool(v, key);
    else if (key == "use_ct") c.use_ct = get_bool(v, key);
    else if (key == "use_pt") c.use_pt = get_bool(v, key);
    else if (key == "use_sup") c.use_sup = get_bool(v, key);
    else if (key == "use_tar") c.use_tar = get_bool(v, key);
    else if (key == "use_lgpi") c.use_lgpi = get_bool(v, key);
    else if (key == "noise_ratio") c.noise_ratio = get_number(v, key);
    else if (key == "seed") c.seed = get_count(v, key);
    else if (key == "max_epochs") c.max_epochs = get_count(v, key);
    else if (key == "patience") c.patience = get_count(v, key);
    else if (key == "pooling") {
      const auto s = get_as<std::string>(v, key);
      if (s == "mean") c.pooling = Pooling::mean;
      else if (s == "root") c.pooling = Pooling::root;
      else throw ConfigError("config key 'pooling': expected mean|root");
    } else if (key == "noise_kind") {
      const auto k = parse_noise_kind(get_as<std::string>(v, key));
      if (!k) throw ConfigError("config key 'noise_kind': expected semantic|structural|mixed");
      c.noise_kind = *k;
    } else if (key == "noise_scope") {
      const auto s = parse_noise_scope(get_as<std::string>(v, key));
      if (!s) throw ConfigError("config key 'noise_scope': expected all|test");
      c.noise_scope = *s;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": invalid JSON: " + e.what());
  }
}

// Values pre-rendered as JSON literals so the canonical form is exact.
std::map<std::string, std::string> fields(const RunConfig& c, bool include_out) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  auto s = [](std::string_view v) { return json_quote(std::string(v)); };
  std::map<std::string, std::string> m{
      {"beta", format_exact(c.beta)},
      {"data", s(c.data)},
      {"final_relu", b(c.final_relu)},
      {"hidden_dim", std::to_string(c.hidden_dim)},
      {"kd_reverse_kl", b(c.kd_reverse_kl)},
      {"lambda", format_exact(c.lambda)},
      {"lr_ct", format_exact(c.lr_ct)},
      {"lr_pt", format_exact(c.lr_pt)},
      {"lr_student", format_exact(c.lr_student)},
      {"max_epochs", std::to_string(c.max_epochs)},
      {"noise_kind", s(to_string(c.noise_kind))},
      {"noise_ratio", format_exact(c.noise_ratio)},
      {"noise_scope", s(to_string(c.noise_scope))},
      {"patience", std::to_string(c.patience)},
      {"pe_dim", std::to_string(c.pe_dim)},
      {"pooling", s(to_string(c.pooling))},
      {"refiner_hidden", std::to_string(c.refiner_hidden)},
      {"rho", format_exact(c.rho)},
      {"seed", std::to_string(c.seed)},
      {"use_ct", b(c.use_ct)},
      {"use_lgpi", b(c.use_lgpi)},
      {"use_pt", b(c.use_pt)},
      {"use_sup", b(c.use_sup)},
      {"use_tar", b(c.use_tar)},
  };
  if (include_out) m.emplace("out", s(c.out));
  return m;
}

std::string render(const std::map<std::string, std::string>& m, bool pretty) {
  std::string out = pretty ? "{\n" : "{";
  bool first = true;
  for (const auto& [k, v] : m) {
    if (!first) out += pretty ? ",\n" : ",";
    first = false;
    if (pretty) out += "  ";
    out += json_quote(k) + (pretty ? ": " : ":") + v;
  }
  out += pretty ? "\n}\n" : "}";
  return out;
}

}  // namespace

RunConfig config_from_json_text(const std::string& text, const RunConfig& base) {
  RunConfig c = base;
  apply_json(c, parse_json_text(text, "config"));
  return c;
}

RunConfig parse_config(const std::filesystem::path& file, const std::string& overrides_json) {
  RunConfig c;
  if (!file.empty()) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open config " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    apply_json(c, parse_json_text(ss.str(), file.string()));
  }
  apply_json(c, parse_json_text(overrides_json, "overrides"));
  if (c.data.empty()) throw ConfigError("missing data path (config key 'data' or --data)");
  validate_config(c);
  return c;
}

std::string canonical_json(const RunConfig& cfg) { return render(fields(cfg, true), false); }

std::string pretty_json(const RunConfig& cfg) { return render(fields(cfg, true), true); }

std::string config_hash(const RunConfig& cfg) {
  return format_hex64(fnv1a64(render(fields(cfg, false), false)));
}

MkdConfig mkd_config(const RunConfig& c) {
  MkdConfig m;
  m.lambda = c.lambda;
  m.beta = c.beta;
  m.rho = c.rho;
  m.use_ct = c.use_ct;
  m.use_pt = c.use_pt;
  m.use_sup = c.use_sup;
  m.use_tar = c.use_tar;
  m.use_lgpi = c.use_lgpi;
  m.reverse_kl = c.kd_reverse_kl;
  return m;
}

StudentOptions student_options(const RunConfig& c) {
  return {c.final_relu, c.pooling, c.use_lgpi};
}

NoiseSpec noise_spec(const RunConfig& c) {
  return {c.noise_kind, c.noise_ratio, c.noise_scope, derive_seed(c.seed, "noise")};
}

TrainOptions train_options(const RunConfig& c, double lr) {
  return {lr, c.max_epochs, c.patience};
}

}  // namespace psstl
