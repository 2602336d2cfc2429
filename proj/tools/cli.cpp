// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "psstl/config.hpp"
#include "psstl/dataset.hpp"
#include "psstl/errors.hpp"
#include "psstl/fixture.hpp"
#include "psstl/model_checks.hpp"
#include "psstl/pipeline.hpp"
#include "psstl/synth.hpp"
#include "psstl/text_format.hpp"

namespace psstl::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flags shared by every command that trains models. Unset flags leave the
// config file (or the defaults) alone.
struct RunFlags {
  std::string config;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda, beta, rho;
  std::optional<double> lr_ct, lr_pt, lr_student;
  std::optional<std::size_t> hidden_dim, pe_dim, refiner_hidden;
  std::optional<std::size_t> max_epochs, patience;
  std::optional<std::string> noise_kind, noise_scope, pooling;
  std::optional<double> noise_ratio;
  bool no_ct = false, no_pt = false, no_sup = false, no_tar = false, no_lgpi = false;
  bool reverse_kl = false, no_final_relu = false;
  std::vector<std::string> set;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON run config");
    app->add_option("--data", data, "dataset (JSONL)");
    app->add_option("--out", out, "output directory");
    app->add_option("--seed", seed, "master seed (overrides PSS_SEED)");
    app->add_option("--lambda", lambda);
    app->add_option("--beta", beta);
    app->add_option("--rho", rho);
    app->add_option("--lr-ct", lr_ct);
    app->add_option("--lr-pt", lr_pt);
    app->add_option("--lr-student", lr_student);
    app->add_option("--hidden-dim", hidden_dim);
    app->add_option("--pe-dim", pe_dim);
    app->add_option("--refiner-hidden", refiner_hidden);
    app->add_option("--max-epochs", max_epochs);
    app->add_option("--patience", patience);
    app->add_option("--noise-kind", noise_kind, "semantic | structural | mixed");
    app->add_option("--noise-ratio", noise_ratio);
    app->add_option("--noise-scope", noise_scope, "all | test");
    app->add_option("--pooling", pooling, "mean | root");
    app->add_flag("--no-ct", no_ct, "drop the content teacher");
    app->add_flag("--no-pt", no_pt, "drop the propagation teacher");
    app->add_flag("--no-sup", no_sup, "drop the logit distillation terms");
    app->add_flag("--no-tar", no_tar, "drop the representation distillation terms");
    app->add_flag("--no-lgpi", no_lgpi, "local-only student representation");
    app->add_flag("--reverse-kl", reverse_kl);
    app->add_flag("--no-final-relu", no_final_relu);
    app->add_option("--set", set, "extra override key=value (value parsed as JSON)");
  }

  std::string overrides_json() const {
    json o = json::object();
    if (const char* env = std::getenv("PSS_SEED"); env != nullptr && *env != '\0') {
      char* end = nullptr;
      errno = 0;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (errno != 0 || *end != '\0' || env[0] == '-') {
        throw ConfigError(std::string("PSS_SEED is not an unsigned integer: ") + env);
      }
      o["seed"] = static_cast<std::uint64_t>(v);
    }
    auto put = [&o](const char* key, const auto& opt) {
      if (opt) o[key] = *opt;
    };
    put("data", data);
    put("out", out);
    put("seed", seed);
    put("lambda", lambda);
    put("beta", beta);
    put("rho", rho);
    put("lr_ct", lr_ct);
    put("lr_pt", lr_pt);
    put("lr_student", lr_student);
    put("hidden_dim", hidden_dim);
    put("pe_dim", pe_dim);
    put("refiner_hidden", refiner_hidden);
    put("max_epochs", max_epochs);
    put("patience", patience);
    put("noise_kind", noise_kind);
    put("noise_ratio", noise_ratio);
    put("noise_scope", noise_scope);
    put("pooling", pooling);
    if (no_ct) o["use_ct"] = false;
    if (no_pt) o["use_pt"] = false;
    if (no_sup) o["use_sup"] = false;
    if (no_tar) o["use_tar"] = false;
    if (no_lgpi) o["use_lgpi"] = false;
    if (reverse_kl) o["kd_reverse_kl"] = true;
    if (no_final_relu) o["final_relu"] = false;
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set expects key=value, got '" + kv + "'");
      }
      const std::string value = kv.substr(eq + 1);
      json parsed = json::parse(value, nullptr, false);
      o[kv.substr(0, eq)] = parsed.is_discarded() ? json(value) : parsed;
    }
    return o.dump();
  }

  RunConfig resolve() const { return parse_config(config, overrides_json()); }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

// Sweep outputs: the base config plus the rows.
void write_sweep(const RunConfig& cfg, std::span<const MetricRow> rows, std::ostream& out) {
  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  write_file(dir / "config.json", pretty_json(cfg));
  write_metrics_csv(dir / "metrics.csv", rows);
  out << "wrote " << rows.size() << " rows to " << (dir / "metrics.csv").string() << "\n";
}

std::string summary(const MetricRow& r) {
  return r.run_id + " seed=" + std::to_string(r.seed) + " config=" + r.config_hash +
         " accuracy=" + format_fixed(r.accuracy, 6) + " macro_f1=" + format_fixed(r.macro_f1, 6);
}

std::vector<NoiseKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<NoiseKind> kinds;
  for (const auto& n : names) {
    const auto k = parse_noise_kind(n);
    if (!k) throw ConfigError("unknown noise kind '" + n + "'");
    kinds.push_back(*k);
  }
  return kinds;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PSS-TL: dual-teacher distillation for fake news detection", "pss-tl"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  SynthParams synth;
  std::string gen_out;
  bool fixture = false;
  gen->add_option("--news", synth.n_news);
  gen->add_option("--users", synth.n_users);
  gen->add_option("--q-in", synth.q_in, "engagement probability inside the label community");
  gen->add_option("--q-out", synth.q_out, "engagement probability across communities");
  gen->add_option("--tree-min", synth.tree_size_min);
  gen->add_option("--tree-max", synth.tree_size_max);
  gen->add_option("--dim", synth.feature_dim);
  gen->add_option("--sigma", synth.feature_noise_std);
  gen->add_option("--seed", synth.seed);
  gen->add_flag("--fixture", fixture, "write the bundled 6-news fixture instead");
  gen->add_option("--out", gen_out, "output JSONL")->required();

  // validate
  auto* validate = app.add_subcommand("validate", "check a dataset against its invariants");
  std::string validate_path;
  validate->add_option("file", validate_path)->required();

  // train
  auto* train = app.add_subcommand("train", "train teachers and student, evaluate on test");
  RunFlags train_flags;
  bool dump_graph = false;
  train_flags.attach(train);
  train->add_flag("--dump-graph", dump_graph, "also write A_news, M and the refined graph");

  // eval
  auto* eval = app.add_subcommand("eval", "re-evaluate a saved run directory");
  std::string eval_dir;
  std::string eval_data;
  eval->add_option("run_dir", eval_dir)->required();
  eval->add_option("--data", eval_data, "dataset (defaults to the recorded path)");

  // noise-sweep
  auto* sweep = app.add_subcommand("noise-sweep", "robustness grid over noise kinds and ratios");
  RunFlags sweep_flags;
  sweep_flags.attach(sweep);
  std::vector<double> ratios{0.0, 0.3, 0.5, 0.7, 0.9};
  std::vector<std::string> kind_names{"semantic", "structural", "mixed"};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5};
  sweep->add_option("--ratios", ratios)->delimiter(',');
  sweep->add_option("--kinds", kind_names)->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds)->delimiter(',');

  // ablate
  auto* ablate = app.add_subcommand("ablate", "full model plus five ablations");
  RunFlags ablate_flags;
  ablate_flags.attach(ablate);
  std::vector<std::uint64_t> ablate_seeds{1, 2, 3, 4, 5};
  ablate->add_option("--seeds", ablate_seeds)->delimiter(',');

  // param-sweep
  auto* psweep = app.add_subcommand("param-sweep", "lambda x beta grid, then rho");
  RunFlags psweep_flags;
  psweep_flags.attach(psweep);
  std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> betas = lambdas;
  std::vector<double> rhos{1, 2, 5, 7, 10};
  std::vector<std::uint64_t> psweep_seeds{1};
  psweep->add_option("--lambdas", lambdas)->delimiter(',');
  psweep->add_option("--betas", betas)->delimiter(',');
  psweep->add_option("--rhos", rhos)->delimiter(',');
  psweep->add_option("--seeds", psweep_seeds)->delimiter(',');

  // grad-check
  auto* gcheck = app.add_subcommand("grad-check", "finite-difference check of every parameter");
  std::string gcheck_data;
  double gcheck_h = 1e-5;
  double gcheck_tol = 1e-4;
  std::uint64_t gcheck_seed = 1;
  gcheck->add_option("--data", gcheck_data, "dataset (defaults to the bundled fixture)");
  gcheck->add_option("--step", gcheck_h, "central-difference step");
  gcheck->add_option("--tol", gcheck_tol, "maximum relative error");
  gcheck->add_option("--seed", gcheck_seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) {
      const Dataset ds = fixture ? fixture_dataset() : generate_synthetic(synth);
      save_dataset(ds, gen_out);
      out << "wrote " << ds.size() << " samples to " << gen_out << "\n";
      return kOk;
    }
    if (validate->parsed()) {
      const Dataset ds = load_dataset(validate_path, /*validate=*/false);
      const auto violations = validate_dataset(ds);
      for (const auto& v : violations) {
        err << v.sample_id << ": " << v.rule << " (" << v.detail << ")\n";
      }
      if (!violations.empty()) return kValidation;
      out << "ok: " << ds.size() << " samples, feature_dim " << ds.feature_dim << "\n";
      return kOk;
    }
    if (train->parsed()) {
      const RunConfig cfg = train_flags.resolve();
      const Dataset clean = load_dataset(cfg.data);
      const ExperimentRun run = run_experiment(clean, cfg);
      write_run_directory(run, cfg.out, dump_graph);
      out << summary(run.row) << "\n";
      return kOk;
    }
    if (eval->parsed()) {
      const MetricRow row = evaluate_run_directory(eval_dir, eval_data);
      const MetricRow rows[] = {row};
      const std::string fresh = metrics_csv(rows);
      out << fresh;
      std::ifstream recorded_file(fs::path(eval_dir) / "metrics.csv", std::ios::binary);
      if (recorded_file) {
        std::stringstream recorded;
        recorded << recorded_file.rdbuf();
        if (recorded.str() != fresh) {
          err << "re-evaluated metrics differ from the recorded metrics.csv\n";
          return kValidation;
        }
      }
      return kOk;
    }
    if (sweep->parsed()) {
      const RunConfig cfg = sweep_flags.resolve();
      const auto kinds = parse_kinds(kind_names);
      const auto rows = robustness_sweep(load_dataset(cfg.data), cfg, ratios, kinds, sweep_seeds);
      write_sweep(cfg, rows, out);
      return kOk;
    }
    if (ablate->parsed()) {
      const RunConfig cfg = ablate_flags.resolve();
      const auto rows = ablation_suite(load_dataset(cfg.data), cfg, ablate_seeds);
      write_sweep(cfg, rows, out);
      return kOk;
    }
    if (psweep->parsed()) {
      const RunConfig cfg = psweep_flags.resolve();
      const auto result =
          param_sweep(load_dataset(cfg.data), cfg, lambdas, betas, rhos, psweep_seeds);
      write_sweep(cfg, result.rows, out);
      out << "best lambda=" << format_fixed(result.best_lambda, 2)
          << " beta=" << format_fixed(result.best_beta, 2) << "\n";
      return kOk;
    }
    if (gcheck->parsed()) {
      const Dataset ds = gcheck_data.empty() ? fixture_dataset() : load_dataset(gcheck_data);
      require_valid(ds);
      RunConfig cfg;
      cfg.seed = gcheck_seed;
      bool ok = true;
      for (const auto& c : run_model_grad_checks(ds, cfg, gcheck_h)) {
        const bool pass = c.report.max_rel_err <= gcheck_tol;
        ok = ok && pass;
        out << c.model << ": max_rel_err=" << format_diagnostic(c.report.max_rel_err)
            << " worst=" << c.report.worst_param << "[" << c.report.worst_index << "]"
            << " checked=" << c.report.coords_checked << " skipped=" << c.report.coords_skipped
            << (pass ? " ok" : " FAIL") << "\n";
      }
      return ok ? kOk : kNumeric;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    err << "invalid data: " << e.what() << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace psstl::cli
