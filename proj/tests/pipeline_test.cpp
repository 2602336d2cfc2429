// SPDX-License-Identifier: Apache-2.0
#include "psstl/pipeline.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "psstl/errors.hpp"
#include "psstl/synth.hpp"
#include "test_util.hpp"

namespace psstl {
namespace {

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::filesystem::path(testing::scratch_dir("pipeline"));
    ds_ = new Dataset(generate_synthetic(testing::small_synth(30, 21)));
    save_dataset(*ds_, *dir_ / "data.jsonl");
  }
  static void TearDownTestSuite() {
    delete ds_;
    delete dir_;
  }
  static RunConfig small_config() {
    RunConfig c;
    c.data = (*dir_ / "data.jsonl").string();
    c.hidden_dim = 8;
    c.pe_dim = 8;
    c.refiner_hidden = 4;
    c.max_epochs = 4;
    c.lr_ct = 1e-3;
    return c;
  }
  static std::filesystem::path* dir_;
  static Dataset* ds_;
};

std::filesystem::path* Pipeline::dir_ = nullptr;
Dataset* Pipeline::ds_ = nullptr;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_F(Pipeline, MetricsCsvFormat) {
  const MetricRow rows[] = {{"a@0.50", 3, "00ff", "mixed", 0.5, 0.1, 0.9, 2.0, 0.75, 2.0 / 3.0}};
  EXPECT_EQ(metrics_csv(rows),
            "run_id,seed,config_hash,noise_kind,ratio,lambda,beta,rho,accuracy,macro_f1\n"
            "a@0.50,3,00ff,mixed,0.500000,0.100000,0.900000,2.000000,0.750000,0.666667\n");
}

TEST_F(Pipeline, SplitDoesNotDependOnNoiseSettings) {
  RunConfig a = small_config();
  RunConfig b = a;
  b.noise_ratio = 0.7;
  b.noise_kind = NoiseKind::structural;
  EXPECT_EQ(prepare_data(*ds_, a).split, prepare_data(*ds_, b).split);
}

TEST_F(Pipeline, OnlyNeededTeachersAreTrained) {
  RunConfig c = small_config();
  c.use_ct = false;
  const PreparedData data = prepare_data(*ds_, c);
  const TeacherBundle t = train_teachers(data, c);
  EXPECT_FALSE(t.content.has_value());
  EXPECT_TRUE(t.propagation.has_value());
  c.use_sup = c.use_tar = false;
  const TeacherBundle none = train_teachers(data, c);
  EXPECT_FALSE(none.propagation.has_value());
}

TEST_F(Pipeline, RunsAreDeterministic) {
  const RunConfig c = small_config();
  const ExperimentRun a = run_experiment(*ds_, c);
  const ExperimentRun b = run_experiment(*ds_, c);
  const MetricRow ra[] = {a.row}, rb[] = {b.row};
  EXPECT_EQ(metrics_csv(ra), metrics_csv(rb));
  EXPECT_EQ(a.student.student.w2.value, b.student.student.w2.value);
}

TEST_F(Pipeline, RatioZeroReproducesTheCleanRunBitwise) {
  RunConfig clean = small_config();
  clean.noise_ratio = 0.0;
  const ExperimentRun ref = run_experiment(*ds_, clean);
  const double ratios[] = {0.0};
  const std::uint64_t seeds[] = {clean.seed};
  for (NoiseKind k : {NoiseKind::semantic, NoiseKind::structural, NoiseKind::mixed}) {
    const NoiseKind kinds[] = {k};
    const auto rows = robustness_sweep(*ds_, clean, ratios, kinds, seeds);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].accuracy, ref.row.accuracy);
    EXPECT_EQ(rows[0].macro_f1, ref.row.macro_f1);
  }
}

TEST_F(Pipeline, RobustnessGridShapeAndOrder) {
  RunConfig c = small_config();
  c.max_epochs = 1;
  const double ratios[] = {0.0, 0.1, 0.3, 0.5, 0.9};
  const NoiseKind kinds[] = {NoiseKind::semantic, NoiseKind::structural, NoiseKind::mixed};
  const std::uint64_t seeds[] = {1, 2, 3, 4, 5};
  const auto rows = robustness_sweep(*ds_, c, ratios, kinds, seeds);
  ASSERT_EQ(rows.size(), 75u);
  EXPECT_EQ(rows[0].run_id, "semantic@0.00");
  EXPECT_EQ(rows[5].run_id, "semantic@0.10");
  EXPECT_EQ(rows[6].seed, 2u);
  EXPECT_EQ(rows[74].run_id, "mixed@0.90");
  EXPECT_EQ(rows[74].noise_kind, "mixed");
  for (const auto& r : rows) {
    // Every row's hash recomputes from its recorded fields.
    RunConfig rc = c;
    rc.seed = r.seed;
    rc.noise_kind = *parse_noise_kind(r.noise_kind);
    rc.noise_ratio = r.ratio;
    EXPECT_EQ(config_hash(rc), r.config_hash);
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.macro_f1, 1.0);
  }
}

TEST_F(Pipeline, AblationRowsFollowTheTableOrder) {
  const RunConfig c = small_config();
  const std::uint64_t seeds[] = {1, 2};
  const auto rows = ablation_suite(*ds_, c, seeds);
  ASSERT_EQ(rows.size(), 12u);
  const char* names[] = {"full", "w/o Content Teacher", "w/o Propagation Teacher",
                         "w/o L_tar", "w/o L_sup", "w/o LGPI"};
  for (std::size_t v = 0; v < 6; ++v) {
    EXPECT_EQ(rows[2 * v].run_id, names[v]);
    EXPECT_EQ(rows[2 * v].seed, 1u);
    EXPECT_EQ(rows[2 * v + 1].seed, 2u);
  }
  // The shared-teacher shortcut changes nothing: the w/o CT row equals a
  // standalone use_ct=false run.
  RunConfig no_ct = c;
  no_ct.use_ct = false;
  no_ct.seed = 2;
  const MetricRow standalone = run_experiment(*ds_, no_ct).row;
  EXPECT_EQ(rows[3].config_hash, standalone.config_hash);
  EXPECT_EQ(rows[3].accuracy, standalone.accuracy);
  EXPECT_EQ(rows[3].macro_f1, standalone.macro_f1);
}

TEST_F(Pipeline, ParamSweepGridAndRhoRows) {
  RunConfig c = small_config();
  c.max_epochs = 1;
  const double grid[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const double rhos[] = {1, 2, 5, 7, 10};
  const std::uint64_t seeds[] = {1};
  const auto result = param_sweep(*ds_, c, grid, grid, rhos, seeds);
  ASSERT_EQ(result.rows.size(), 86u);
  EXPECT_EQ(result.rows[0].lambda, 0.1);
  EXPECT_EQ(result.rows[0].beta, 0.1);
  EXPECT_EQ(result.rows[1].beta, 0.2);
  EXPECT_EQ(result.rows[9].lambda, 0.2);
  for (std::size_t i = 81; i < 86; ++i) {
    EXPECT_EQ(result.rows[i].lambda, result.best_lambda);
    EXPECT_EQ(result.rows[i].beta, result.best_beta);
    EXPECT_EQ(result.rows[i].rho, rhos[i - 81]);
  }
  EXPECT_THROW(param_sweep(*ds_, c, {}, grid, rhos, seeds), ParameterError);
}

TEST_F(Pipeline, ParamSweepTiesResolveToSmallerValues) {
  // With no distillation terms every (lambda, beta) cell trains the same student.
  RunConfig c = small_config();
  c.max_epochs = 2;
  c.use_sup = c.use_tar = false;
  const double lambdas[] = {0.7, 0.3}, betas[] = {0.9, 0.4}, rhos[] = {2};
  const std::uint64_t seeds[] = {1};
  const auto result = param_sweep(*ds_, c, lambdas, betas, rhos, seeds);
  EXPECT_EQ(result.best_lambda, 0.3);
  EXPECT_EQ(result.best_beta, 0.4);
}

TEST_F(Pipeline, RunDirectoryIsSelfDescribing) {
  RunConfig c = small_config();
  c.noise_ratio = 0.3;
  c.out = (*dir_ / "run").string();
  const ExperimentRun run = run_experiment(*ds_, c);
  write_run_directory(run, c.out, /*dump_graph=*/true);
  for (const char* f : {"config.json", "content.json", "propagation.json", "student.json",
                        "history.csv", "content_history.csv", "propagation_history.csv",
                        "metrics.csv", "a_news.csv", "m.csv", "a_refined.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(*dir_ / "run" / f)) << f;
  }
  const MetricRow again = evaluate_run_directory(*dir_ / "run");
  const MetricRow a[] = {run.row}, b[] = {again};
  EXPECT_EQ(metrics_csv(a), metrics_csv(b));
  EXPECT_EQ(slurp(*dir_ / "run" / "metrics.csv"), metrics_csv(b));
  const std::string history = slurp(*dir_ / "run" / "history.csv");
  EXPECT_EQ(history.rfind("epoch,cls,sup_pt,tar_pt,sup_ct,tar_ct,total,val_acc,val_macro_f1\n", 0),
            0u);
}

TEST_F(Pipeline, EvaluatingWithAnEditedConfigIsRejected) {
  RunConfig c = small_config();
  c.out = (*dir_ / "edited").string();
  write_run_directory(run_experiment(*ds_, c), c.out);
  RunConfig edited = c;
  edited.hidden_dim = 8;
  edited.lambda = 0.9;
  std::ofstream(*dir_ / "edited" / "config.json") << pretty_json(edited);
  EXPECT_THROW(evaluate_run_directory(*dir_ / "edited"), ValidationError);
}

}  // namespace
}  // namespace psstl
