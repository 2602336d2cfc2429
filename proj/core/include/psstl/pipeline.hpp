// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psstl/config.hpp"
#include "psstl/dataset.hpp"
#include "psstl/distill.hpp"
#include "psstl/metrics.hpp"
#include "psstl/noise.hpp"
#include "psstl/student.hpp"
#include "psstl/teachers.hpp"

namespace psstl {

/// One line of metrics.csv.
struct MetricRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string noise_kind;
  double ratio = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

std::string metrics_csv(std::span<const MetricRow> rows);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows);

/// Noisy dataset, split and every parameter-independent model input for one
/// run. The split is drawn on the clean sample count, so it does not depend
/// on the noise settings.
struct PreparedData {
  Dataset data;
  Split split;
  std::vector<int> labels;
  Matrix a_news;
  Matrix x_news;
  PropagationInputs propagation;
  StudentInputs student;
};

PreparedData prepare_data(const Dataset& clean, const RunConfig& cfg);

bool uses_content_teacher(const RunConfig& cfg);
bool uses_propagation_teacher(const RunConfig& cfg);

/// Trained (then frozen) teachers and their outputs over all news.
struct TeacherBundle {
  std::optional<ContentTeacher> content;
  std::optional<PropagationTeacher> propagation;
  TeacherOutput content_out;
  TeacherOutput propagation_out;
  TeacherTrainResult content_result;
  TeacherTrainResult propagation_result;

  TeacherSignals signals() const;
};

/// Trains the teachers that `cfg` uses, each from its own seed stream.
TeacherBundle train_teachers(const PreparedData& data, const RunConfig& cfg);

struct StudentRun {
  StudentModel student;
  StudentTrainResult result;
  EvalMetrics val;
  EvalMetrics test;
};

StudentRun run_student(const PreparedData& data, const TeacherBundle& teachers,
                       const RunConfig& cfg);

EvalMetrics evaluate_student(const StudentModel& model, const PreparedData& data,
                             std::span<const std::size_t> rows);

MetricRow make_metric_row(const std::string& run_id, const RunConfig& cfg,
                          const EvalMetrics& metrics);

/// prepare -> teachers -> student -> test metrics.
struct ExperimentRun {
  RunConfig config;
  PreparedData data;
  TeacherBundle teachers;
  StudentRun student;
  MetricRow row;
};

ExperimentRun run_experiment(const Dataset& clean, const RunConfig& cfg,
                             const std::string& run_id = "train");

/// Writes config.json, checkpoints, histories and metrics.csv into dir.
/// With dump_graph, also a_news.csv, m.csv and a_refined.csv.
void write_run_directory(const ExperimentRun& run, const std::filesystem::path& dir,
                         bool dump_graph = false);

/// Reloads config.json and student.json from dir, rebuilds the inputs from
/// `data` (the recorded data path if empty) and recomputes the test row.
MetricRow evaluate_run_directory(const std::filesystem::path& dir,
                                 const std::filesystem::path& data = {});

// ---------------------------------------------------------------------------
// Experiment grids. Each cell is a fresh pipeline run whose seed is taken
// from `seeds`; rows come back in the documented loop order.

/// kinds x ratios x seeds (outer to inner); run_id "<kind>@<ratio>".
std::vector<MetricRow> robustness_sweep(const Dataset& clean, const RunConfig& base,
                                        std::span<const double> ratios,
                                        std::span<const NoiseKind> kinds,
                                        std::span<const std::uint64_t> seeds);

struct AblationVariant {
  std::string name;
  RunConfig config;
};

/// full, w/o Content Teacher, w/o Propagation Teacher, w/o L_tar, w/o L_sup,
/// w/o LGPI (in that order).
std::vector<AblationVariant> ablation_variants(const RunConfig& base);

/// variants x seeds; teachers are trained once per seed and shared.
std::vector<MetricRow> ablation_suite(const Dataset& clean, const RunConfig& base,
                                      std::span<const std::uint64_t> seeds);

struct ParamSweepResult {
  std::vector<MetricRow> rows;
  double best_lambda = 0.0;
  double best_beta = 0.0;
};

/// Full (lambda, beta) factorial at base.rho (lambda-major, then beta, then
/// seed), then a rho sweep at the (lambda, beta) with the highest mean
/// validation macro-F1 (ties: smaller lambda, then smaller beta).
ParamSweepResult param_sweep(const Dataset& clean, const RunConfig& base,
                             std::span<const double> lambdas, std::span<const double> betas,
                             std::span<const double> rhos, std::span<const std::uint64_t> seeds);

}  // namespace psstl
