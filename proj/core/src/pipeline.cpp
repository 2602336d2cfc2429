// SPDX-License-Identifier: Apache-2.0
#include "psstl/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "psstl/checkpoint.hpp"
#include "psstl/errors.hpp"
#include "psstl/losses.hpp"
#include "psstl/rng.hpp"
#include "psstl/text_format.hpp"

namespace psstl {

namespace {

constexpr const char* kMetricsHeader =
    "run_id,seed,config_hash,noise_kind,ratio,lambda,beta,rho,accuracy,macro_f1\n";

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string metrics_csv(std::span<const MetricRow> rows) {
  std::string out = kMetricsHeader;
  for (const auto& r : rows) {
    out += r.run_id + "," + std::to_string(r.seed) + "," + r.config_hash + "," + r.noise_kind +
           "," + format_fixed(r.ratio, 6) + "," + format_fixed(r.lambda, 6) + "," +
           format_fixed(r.beta, 6) + "," + format_fixed(r.rho, 6) + "," +
           format_fixed(r.accuracy, 6) + "," + format_fixed(r.macro_f1, 6) + "\n";
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows) {
  write_text(path, metrics_csv(rows));
}

PreparedData prepare_data(const Dataset& clean, const RunConfig& cfg) {
  validate_config(cfg);
  PreparedData p;
  p.split = split_dataset(clean, derive_seed(cfg.seed, "split"));
  p.data = apply_noise(clean, noise_spec(cfg), p.split);
  p.labels = p.data.labels();
  p.a_news = build_global_graph(build_engagement_matrix(p.data));
  p.x_news = news_feature_matrix(p.data);
  p.propagation = make_propagation_inputs(p.a_news);
  p.student = make_student_inputs(p.data, p.a_news);
  return p;
}

bool uses_content_teacher(const RunConfig& cfg) {
  return cfg.use_ct && (cfg.use_sup || cfg.use_tar);
}

bool uses_propagation_teacher(const RunConfig& cfg) {
  return cfg.use_pt && (cfg.use_sup || cfg.use_tar);
}

TeacherSignals TeacherBundle::signals() const {
  return {content ? &content_out : nullptr, propagation ? &propagation_out : nullptr};
}

TeacherBundle train_teachers(const PreparedData& data, const RunConfig& cfg) {
  TeacherBundle b;
  if (uses_content_teacher(cfg)) {
    Rng rng(derive_seed(cfg.seed, "init/content"));
    b.content.emplace(data.data.feature_dim, cfg.hidden_dim, cfg.final_relu, rng);
    b.content_result = train_content_teacher(*b.content, data.x_news, data.labels, data.split,
                                             train_options(cfg, cfg.lr_ct));
    b.content_out = b.content->forward(data.x_news).out;
  }
  if (uses_propagation_teacher(cfg)) {
    Rng rng(derive_seed(cfg.seed, "init/propagation"));
    b.propagation.emplace(data.data.size(), cfg.pe_dim, cfg.hidden_dim, cfg.refiner_hidden,
                          cfg.final_relu, rng);
    b.propagation_result =
        train_propagation_teacher(*b.propagation, data.propagation, data.labels, data.split,
                                  train_options(cfg, cfg.lr_pt));
    b.propagation_out = b.propagation->forward(data.propagation).out;
  }
  return b;
}

EvalMetrics evaluate_student(const StudentModel& model, const PreparedData& data,
                             std::span<const std::size_t> rows) {
  const auto preds = argmax_rows(model.forward(data.student).out.logits);
  return evaluate(preds, data.labels, rows);
}

StudentRun run_student(const PreparedData& data, const TeacherBundle& teachers,
                       const RunConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "init/student"));
  StudentRun run{StudentModel(data.data.feature_dim, cfg.hidden_dim, student_options(cfg), rng),
                 {}, {}, {}};
  run.result = train_student(run.student, data.student, teachers.signals(), data.labels,
                             data.split, mkd_config(cfg), train_options(cfg, cfg.lr_student));
  run.val = evaluate_student(run.student, data, data.split.val);
  run.test = evaluate_student(run.student, data, data.split.test);
  return run;
}

MetricRow make_metric_row(const std::string& run_id, const RunConfig& cfg,
                          const EvalMetrics& metrics) {
  return {run_id,     cfg.seed, config_hash(cfg), std::string(to_string(cfg.noise_kind)),
          cfg.noise_ratio, cfg.lambda, cfg.beta, cfg.rho, metrics.accuracy, metrics.macro_f1};
}

ExperimentRun run_experiment(const Dataset& clean, const RunConfig& cfg,
                             const std::string& run_id) {
  ExperimentRun run;
  run.config = cfg;
  run.data = prepare_data(clean, cfg);
  run.teachers = train_teachers(run.data, cfg);
  run.student = run_student(run.data, run.teachers, cfg);
  run.row = make_metric_row(run_id, cfg, run.student.test);
  return run;
}

namespace {

std::string teacher_history_csv(const TeacherTrainResult& r) {
  std::string out = "epoch,train_loss,val_loss,val_acc,val_macro_f1\n";
  for (const auto& e : r.history) {
    out += std::to_string(e.epoch) + "," + format_exact(e.train_loss) + "," +
           format_exact(e.val_loss) + "," + format_fixed(e.val_accuracy, 6) + "," +
           format_fixed(e.val_macro_f1, 6) + "\n";
  }
  return out;
}

std::string student_history_csv(const StudentTrainResult& r) {
  std::string out = "epoch,cls,sup_pt,tar_pt,sup_ct,tar_ct,total,val_acc,val_macro_f1\n";
  for (const auto& e : r.history) {
    const auto& l = e.losses;
    out += std::to_string(e.epoch.epoch) + "," + format_exact(l.cls) + "," +
           format_exact(l.sup_pt) + "," + format_exact(l.tar_pt) + "," + format_exact(l.sup_ct) +
           "," + format_exact(l.tar_ct) + "," + format_exact(l.total) + "," +
           format_fixed(e.epoch.val_accuracy, 6) + "," + format_fixed(e.epoch.val_macro_f1, 6) +
           "\n";
  }
  return out;
}

}  // namespace

void write_run_directory(const ExperimentRun& run, const std::filesystem::path& dir,
                         bool dump_graph) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto& cfg = run.config;
  const std::string hash = config_hash(cfg);
  write_text(dir / "config.json", pretty_json(cfg));
  // Checkpoints are written from copies so the run stays const.
  if (run.teachers.content) {
    ContentTeacher ct = *run.teachers.content;
    save_checkpoint(dir / "content.json", "content", hash, cfg.seed, ct.params());
    write_text(dir / "content_history.csv", teacher_history_csv(run.teachers.content_result));
  }
  if (run.teachers.propagation) {
    PropagationTeacher pt = *run.teachers.propagation;
    save_checkpoint(dir / "propagation.json", "propagation", hash, cfg.seed, pt.params());
    write_text(dir / "propagation_history.csv",
               teacher_history_csv(run.teachers.propagation_result));
    if (dump_graph) {
      const auto trace = pt.forward(run.data.propagation);
      write_matrix_csv(run.data.a_news, dir / "a_news.csv");
      write_matrix_csv(trace.retention.m, dir / "m.csv");
      write_matrix_csv(trace.a_refined, dir / "a_refined.csv");
    }
  } else if (dump_graph) {
    write_matrix_csv(run.data.a_news, dir / "a_news.csv");
  }
  StudentModel student = run.student.student;
  save_checkpoint(dir / "student.json", "student", hash, cfg.seed, student.params());
  write_text(dir / "history.csv", student_history_csv(run.student.result));
  const MetricRow rows[] = {run.row};
  write_metrics_csv(dir / "metrics.csv", rows);
}

MetricRow evaluate_run_directory(const std::filesystem::path& dir,
                                 const std::filesystem::path& data) {
  RunConfig cfg = config_from_json_text(read_text(dir / "config.json"));
  if (!data.empty()) cfg.data = data.string();
  validate_config(cfg);
  const Dataset clean = load_dataset(cfg.data);
  const PreparedData prepared = prepare_data(clean, cfg);
  Rng unused(0);
  StudentModel student(prepared.data.feature_dim, cfg.hidden_dim, student_options(cfg), unused);
  const auto info = load_checkpoint(dir / "student.json", "student", student.params());
  if (info.config_hash != config_hash(cfg)) {
    throw ValidationError("student checkpoint was produced by config " + info.config_hash +
                          ", not " + config_hash(cfg));
  }
  // The row's run id is recovered from the recorded metrics when present.
  std::string run_id = "train";
  std::ifstream recorded(dir / "metrics.csv");
  std::string line;
  if (recorded && std::getline(recorded, line) && std::getline(recorded, line)) {
    run_id = line.substr(0, line.find(','));
  }
  return make_metric_row(run_id, cfg, evaluate_student(student, prepared, prepared.split.test));
}

// ---------------------------------------------------------------------------

std::vector<MetricRow> robustness_sweep(const Dataset& clean, const RunConfig& base,
                                        std::span<const double> ratios,
                                        std::span<const NoiseKind> kinds,
                                        std::span<const std::uint64_t> seeds) {
  std::vector<MetricRow> rows;
  rows.reserve(kinds.size() * ratios.size() * seeds.size());
  for (NoiseKind kind : kinds) {
    for (double ratio : ratios) {
      for (std::uint64_t seed : seeds) {
        RunConfig cfg = base;
        cfg.noise_kind = kind;
        cfg.noise_ratio = ratio;
        cfg.seed = seed;
        const std::string id = std::string(to_string(kind)) + "@" + format_fixed(ratio, 2);
        rows.push_back(run_experiment(clean, cfg, id).row);
      }
    }
  }
  return rows;
}

std::vector<AblationVariant> ablation_variants(const RunConfig& base) {
  std::vector<AblationVariant> v;
  v.push_back({"full", base});
  v.push_back({"w/o Content Teacher", base});
  v.back().config.use_ct = false;
  v.push_back({"w/o Propagation Teacher", base});
  v.back().config.use_pt = false;
  v.push_back({"w/o L_tar", base});
  v.back().config.use_tar = false;
  v.push_back({"w/o L_sup", base});
  v.back().config.use_sup = false;
  v.push_back({"w/o LGPI", base});
  v.back().config.use_lgpi = false;
  return v;
}

std::vector<MetricRow> ablation_suite(const Dataset& clean, const RunConfig& base,
                                      std::span<const std::uint64_t> seeds) {
  const auto variants = ablation_variants(base);
  // rows[variant][seed] so the output is variant-major.
  std::vector<std::vector<MetricRow>> grid(variants.size());
  for (std::uint64_t seed : seeds) {
    RunConfig seeded = base;
    seeded.seed = seed;
    const PreparedData data = prepare_data(clean, seeded);
    // Teachers depend only on fields the variants share.
    RunConfig teacher_cfg = seeded;
    teacher_cfg.use_ct = teacher_cfg.use_pt = teacher_cfg.use_sup = teacher_cfg.use_tar = true;
    const TeacherBundle teachers = train_teachers(data, teacher_cfg);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      RunConfig cfg = variants[v].config;
      cfg.seed = seed;
      const StudentRun run = run_student(data, teachers, cfg);
      grid[v].push_back(make_metric_row(variants[v].name, cfg, run.test));
    }
  }
  std::vector<MetricRow> rows;
  for (auto& g : grid) rows.insert(rows.end(), g.begin(), g.end());
  return rows;
}

ParamSweepResult param_sweep(const Dataset& clean, const RunConfig& base,
                             std::span<const double> lambdas, std::span<const double> betas,
                             std::span<const double> rhos, std::span<const std::uint64_t> seeds) {
  if (lambdas.empty() || betas.empty() || rhos.empty() || seeds.empty()) {
    throw ParameterError("param_sweep: every grid must be non-empty");
  }
  struct SeedContext {
    RunConfig cfg;
    PreparedData data;
    TeacherBundle teachers;
  };
  std::vector<SeedContext> contexts;
  for (std::uint64_t seed : seeds) {
    RunConfig cfg = base;
    cfg.seed = seed;
    PreparedData data = prepare_data(clean, cfg);
    TeacherBundle teachers = train_teachers(data, cfg);
    contexts.push_back({cfg, std::move(data), std::move(teachers)});
  }

  ParamSweepResult out;
  // Ordered by (lambda, beta) so ties resolve to the smaller values.
  std::map<std::pair<double, double>, double> mean_val_f1;
  for (double lambda : lambdas) {
    for (double beta : betas) {
      double val_sum = 0.0;
      for (const auto& ctx : contexts) {
        RunConfig cfg = ctx.cfg;
        cfg.lambda = lambda;
        cfg.beta = beta;
        const StudentRun run = run_student(ctx.data, ctx.teachers, cfg);
        val_sum += run.val.macro_f1;
        out.rows.push_back(make_metric_row(
            "grid/lambda=" + format_fixed(lambda, 2) + "/beta=" + format_fixed(beta, 2), cfg,
            run.test));
      }
      mean_val_f1[{lambda, beta}] = val_sum / static_cast<double>(contexts.size());
    }
  }
  double best = -1.0;
  for (const auto& [key, f1] : mean_val_f1) {
    if (f1 > best) {
      best = f1;
      out.best_lambda = key.first;
      out.best_beta = key.second;
    }
  }
  for (double rho : rhos) {
    for (const auto& ctx : contexts) {
      RunConfig cfg = ctx.cfg;
      cfg.lambda = out.best_lambda;
      cfg.beta = out.best_beta;
      cfg.rho = rho;
      const StudentRun run = run_student(ctx.data, ctx.teachers, cfg);
      out.rows.push_back(make_metric_row("rho/rho=" + format_fixed(rho, 2), cfg, run.test));
    }
  }
  return out;
}

}  // namespace psstl
