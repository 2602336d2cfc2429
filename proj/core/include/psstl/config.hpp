// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "psstl/distill.hpp"
#include "psstl/noise.hpp"
#include "psstl/student.hpp"
#include "psstl/training.hpp"

namespace psstl {

/// Every knob of one experiment run. JSON keys match the field names.
struct RunConfig {
  std::string data;
  std::size_t hidden_dim = 64;
  std::size_t pe_dim = 64;
  std::size_t refiner_hidden = 16;
  double lr_ct = 5e-5;
  double lr_pt = 5e-4;
  double lr_student = 5e-4;
  double lambda = 0.5;
  double beta = 0.5;
  double rho = 2.0;
  bool final_relu = true;
  bool kd_reverse_kl = false;
  Pooling pooling = Pooling::mean;
  bool use_ct = true;
  bool use_pt = true;
  bool use_sup = true;
  bool use_tar = true;
  bool use_lgpi = true;
  NoiseKind noise_kind = NoiseKind::mixed;
  double noise_ratio = 0.0;
  NoiseScope noise_scope = NoiseScope::all;
  std::uint64_t seed = 1;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::string out = "runs/default";

  bool operator==(const RunConfig&) const = default;
};

/// Range checks; throws ConfigError naming the offending key.
void validate_config(const RunConfig& cfg);

/// Parses a JSON object (text). Unknown keys and wrongly-typed values are
/// rejected. Missing keys keep their defaults. Does not require `data`.
RunConfig config_from_json_text(const std::string& text, const RunConfig& base = {});

/// Config file (may be empty path) overlaid with a JSON object of overrides
/// (flags win). Requires a non-empty `data`; validates the result.
RunConfig parse_config(const std::filesystem::path& file, const std::string& overrides_json = "{}");

/// Sorted-key, whitespace-free JSON of every field; doubles at %.17g.
std::string canonical_json(const RunConfig& cfg);
/// Pretty form written as config.json in a run directory.
std::string pretty_json(const RunConfig& cfg);
/// FNV-1a-64 (hex) of canonical_json with `out` excluded: the output location
/// does not change what is computed.
std::string config_hash(const RunConfig& cfg);

MkdConfig mkd_config(const RunConfig& cfg);
StudentOptions student_options(const RunConfig& cfg);
NoiseSpec noise_spec(const RunConfig& cfg);
TrainOptions train_options(const RunConfig& cfg, double lr);

std::string_view to_string(Pooling pooling);

}  // namespace psstl
