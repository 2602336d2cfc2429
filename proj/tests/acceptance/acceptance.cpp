// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, details after the
// verdict. Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "psstl/config.hpp"
#include "psstl/dataset.hpp"
#include "psstl/distill.hpp"
#include "psstl/fixture.hpp"
#include "psstl/global_graph.hpp"
#include "psstl/losses.hpp"
#include "psstl/metrics.hpp"
#include "psstl/model_checks.hpp"
#include "psstl/noise.hpp"
#include "psstl/pipeline.hpp"
#include "psstl/synth.hpp"
#include "psstl/text_format.hpp"

namespace fs = std::filesystem;
using namespace psstl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Verdict()>& body) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.note(std::string("exception: ") + e.what());
  }
  if (!v.pass) ++failures;
  std::printf("%s %s  %s [%s] (%.1fs)\n", id, v.pass ? "PASS" : "FAIL", title, v.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The benchmark dataset shared by AC5 and AC6.
SynthParams benchmark_params() { return SynthParams{}; }  // 200 news, 500 users, q 0.05/0.005

RunConfig benchmark_config() {
  RunConfig c;
  c.data = "synthetic:default";
  c.noise_kind = NoiseKind::mixed;
  c.noise_ratio = 0.5;
  c.noise_scope = NoiseScope::all;
  return c;
}

const std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

// ---------------------------------------------------------------------------

Verdict ac1() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto checks = run_model_grad_checks(fixture_dataset(), RunConfig{}, 1e-5);
  const double elapsed = seconds_since(t0);
  for (const auto& c : checks) {
    v.require(c.report.max_rel_err <= 1e-4, c.model + " rel err " +
                                                format_diagnostic(c.report.max_rel_err));
    v.note(c.model + " " + fmt("%.2e", c.report.max_rel_err) + " over " +
           std::to_string(c.report.coords_checked) + " coords");
  }
  v.require(elapsed <= 5.0, "runtime " + fmt("%.2f", elapsed) + "s > 5s");
  return v;
}

Verdict ac2() {
  Verdict v;
  const Dataset ds = generate_synthetic([] {
    SynthParams p;
    p.n_news = 40;
    p.n_users = 80;
    p.q_in = 0.12;
    p.q_out = 0.02;
    p.feature_dim = 8;
    return p;
  }());
  RunConfig cfg;
  cfg.data = "synthetic:ac2";
  cfg.hidden_dim = 16;
  cfg.pe_dim = 16;
  cfg.max_epochs = 30;
  const PreparedData data = prepare_data(ds, cfg);
  const TeacherBundle teachers = train_teachers(data, cfg);

  // Composition at lambda = beta = 0.5, rho = 2 on an untrained student.
  Rng rng(derive_seed(cfg.seed, "init/student"));
  StudentModel student(ds.feature_dim, cfg.hidden_dim, student_options(cfg), rng);
  const StudentOutput out = student.forward(data.student).out;
  const auto& rows = data.split.train;
  const MkdResult r = mkd_total(out, teachers.signals(), data.labels, rows, mkd_config(cfg));
  const Matrix zs = gather_rows(out.logits, rows);
  const Matrix hs = gather_rows(out.h_s, rows);
  const auto& ct = teachers.content_out;
  const auto& pt = teachers.propagation_out;
  const double expected = cross_entropy(out.logits, data.labels, rows).value +
                          0.5 * sup_loss(zs, gather_rows(pt.logits, rows), 2.0).value +
                          0.5 * tar_loss(hs, gather_rows(pt.hidden, rows)).value +
                          0.5 * sup_loss(zs, gather_rows(ct.logits, rows), 2.0).value +
                          0.5 * tar_loss(hs, gather_rows(ct.hidden, rows)).value;
  const double gap = std::abs(r.breakdown.total - expected);
  v.require(gap <= 1e-12, "composition gap " + format_diagnostic(gap));
  v.note("composition gap " + fmt("%.1e", gap));

  // lambda = beta = 1 against use_ct = false.
  RunConfig ones = cfg;
  ones.lambda = ones.beta = 1.0;
  RunConfig no_ct = ones;
  no_ct.use_ct = false;
  const StudentRun a = run_student(data, teachers, ones);
  const StudentRun b = run_student(data, teachers, no_ct);
  bool same = a.result.history.size() == b.result.history.size();
  for (std::size_t e = 0; same && e < a.result.history.size(); ++e) {
    same = a.result.history[e].losses.total == b.result.history[e].losses.total &&
           a.result.history[e].epoch.val_macro_f1 == b.result.history[e].epoch.val_macro_f1;
  }
  StudentModel sa = a.student, sb = b.student;
  const auto pa = sa.params(), pb = sb.params();
  for (std::size_t i = 0; same && i < pa.size(); ++i) same = pa[i]->value == pb[i]->value;
  v.require(same, "lambda=beta=1 trajectory differs from use_ct=false");
  v.note("lambda=beta=1 trajectory bitwise equal over " +
         std::to_string(a.result.history.size()) + " epochs");
  return v;
}

Verdict ac3() {
  Verdict v;
  Rng rng(3);
  double worst_sup = 0.0;
  for (double rho : {1.0, 2.0, 5.0, 7.0, 10.0}) {
    for (int t = 0; t < 10; ++t) {
      const Matrix z = random_matrix(8, 2, rng);
      worst_sup = std::max(worst_sup, std::abs(sup_loss(z, z, rho).value));
    }
  }
  v.require(worst_sup == 0.0, "sup_loss(z,z) = " + format_diagnostic(worst_sup));
  double worst_tar = 0.0;
  for (std::size_t n : {2u, 4u, 8u}) {
    const Matrix h_s = random_matrix(n, 6, rng);
    const Matrix row = random_matrix(1, 6, rng);
    Matrix h_t(n, 6);
    for (std::size_t i = 0; i < n; ++i) std::copy_n(row.row(0).data(), 6, h_t.row(i).data());
    worst_tar = std::max(worst_tar,
                         std::abs(tar_loss(h_s, h_t).value - std::log(static_cast<double>(n))));
  }
  v.require(worst_tar <= 1e-9, "tar_loss vs ln N off by " + format_diagnostic(worst_tar));
  const double kl =
      kl_rows(Matrix::from_rows({{1.0, 0.0}}), Matrix::from_rows({{0.5, 0.5}})) - std::log(2.0);
  v.require(std::abs(kl) <= 1e-9, "KL([1,0],[.5,.5]) - ln2 = " + format_diagnostic(kl));
  v.note("sup max " + fmt("%.1e", worst_sup) + ", tar max " + fmt("%.1e", worst_tar) +
         ", KL err " + fmt("%.1e", std::abs(kl)));
  return v;
}

Verdict ac4() {
  Verdict v;
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4 + rng.uniform_index(20);
    const std::size_t u = 3 + rng.uniform_index(15);
    Matrix e(n, u);
    for (double& x : e.data()) x = rng.bernoulli(0.3) ? static_cast<double>(1 + rng.uniform_index(5)) : 0.0;
    const Matrix a = build_global_graph(e);
    bool symmetric = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) symmetric = symmetric && a(i, j) == a(j, i);
    v.require(symmetric, "trial " + std::to_string(trial) + " not symmetric");
    double min_quad = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
      const Matrix x = random_matrix(n, 1, rng);
      min_quad = std::min(min_quad, matmul(matmul_tn(x, a), x)(0, 0));
    }
    v.require(min_quad >= -1e-9 * std::max(1.0, max_abs(a)),
              "trial " + std::to_string(trial) + " PSD probe " + format_diagnostic(min_quad));
    const EdgeRefiner refiner(16, rng);
    const Matrix m = edge_retention(a, node_degrees(a), refiner);
    const Matrix a_hat = refine(a, m);
    bool support = true, range = true, diag = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        range = range && m(i, j) >= 0.0 && m(i, j) <= 1.0;
        const bool edge = i != j && a(i, j) != 0.0;
        support = support && (edge ? m(i, j) > 0.0 : m(i, j) == 0.0);
      }
      diag = diag && a_hat(i, i) >= 1.0;
    }
    v.require(range, "M outside [0,1]");
    v.require(support, "M support differs from A's off-diagonal nonzeros");
    v.require(diag, "refined diagonal below 1");
  }
  SynthParams p = benchmark_params();
  p.q_out = 0.0;
  const Dataset ds = generate_synthetic(p);
  const Matrix a = build_global_graph(build_engagement_matrix(ds));
  std::size_t cross = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < ds.size(); ++j)
      cross += ds.samples[i].label != ds.samples[j].label && a(i, j) != 0.0;
  v.require(cross == 0, std::to_string(cross) + " cross-class entries with q_out=0");
  v.note("20 random graphs; q_out=0 graph block-diagonal");
  return v;
}

// Full model against the no-teacher student on the benchmark, per seed.
struct Ac5Result {
  std::vector<double> full, none;
};

Ac5Result ac5_runs(const Dataset& ds) {
  Ac5Result r;
  for (std::uint64_t seed : kSeeds) {
    RunConfig cfg = benchmark_config();
    cfg.seed = seed;
    r.full.push_back(run_experiment(ds, cfg).row.macro_f1);
    RunConfig base = cfg;
    base.use_ct = base.use_pt = false;
    r.none.push_back(run_experiment(ds, base).row.macro_f1);
  }
  return r;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + fmt("%.3f", x);
  return s;
}

// Means from the first run on this benchmark, frozen so later changes that
// move the numbers are noticed.
constexpr double kFrozenFullMean = 0.7318;
constexpr double kFrozenNoTeacherMean = 0.5583;

Verdict ac5(const Dataset& ds) {
  Verdict v;
  const auto t0 = Clock::now();
  const Ac5Result r = ac5_runs(ds);
  const double elapsed = seconds_since(t0);
  int wins = 0;
  for (std::size_t i = 0; i < r.full.size(); ++i) wins += r.full[i] > r.none[i];
  const double margin = mean(r.full) - mean(r.none);
  v.require(margin > 0.0, "full mean does not exceed no-teacher mean");
  v.require(wins >= 4, "full wins only " + std::to_string(wins) + "/5 seeds");
  v.require(elapsed <= 300.0, "runtime " + fmt("%.0f", elapsed) + "s > 300s");
  v.require(std::abs(mean(r.full) - kFrozenFullMean) <= 5e-4 &&
                std::abs(mean(r.none) - kFrozenNoTeacherMean) <= 5e-4,
            "means moved from the frozen baseline");
  v.note("full mean " + fmt("%.4f", mean(r.full)) + " [" + list(r.full) + "], no-teacher mean " +
         fmt("%.4f", mean(r.none)) + " [" + list(r.none) + "], margin " + fmt("%+.4f", margin) +
         ", wins " + std::to_string(wins) + "/5");
  return v;
}

Verdict ac6(const Dataset& ds) {
  Verdict v;
  const auto rows = ablation_suite(ds, benchmark_config(), kSeeds);
  const std::vector<std::string> expected{"full", "w/o Content Teacher",
                                          "w/o Propagation Teacher", "w/o L_tar", "w/o L_sup",
                                          "w/o LGPI"};
  v.require(rows.size() == expected.size() * 5, "row count " + std::to_string(rows.size()));
  std::map<std::string, std::vector<double>> f1;
  for (const auto& r : rows) f1[r.run_id].push_back(r.macro_f1);
  for (const auto& name : expected) {
    v.require(f1[name].size() == 5, "missing rows for '" + name + "'");
  }
  if (!v.pass) return v;
  const auto& full = f1["full"];
  v.note("full mean " + fmt("%.4f", mean(full)));
  for (std::size_t k = 1; k < expected.size(); ++k) {
    const auto& abl = f1[expected[k]];
    int at_least = 0;
    for (std::size_t s = 0; s < 5; ++s) at_least += full[s] >= abl[s];
    v.require(at_least >= 3, "'" + expected[k] + "' beats full in " +
                                 std::to_string(5 - at_least) + "/5 seeds");
    v.note(expected[k] + " mean " + fmt("%.4f", mean(abl)) + " (full>= in " +
           std::to_string(at_least) + "/5)");
  }
  return v;
}

Verdict ac7() {
  Verdict v;
  const Dataset ds = generate_synthetic([] {
    SynthParams p;
    p.n_news = 40;
    p.n_users = 80;
    p.q_in = 0.12;
    p.q_out = 0.02;
    p.feature_dim = 8;
    return p;
  }());
  RunConfig cfg;
  cfg.data = "synthetic:ac7";
  cfg.hidden_dim = 16;
  cfg.pe_dim = 16;
  cfg.max_epochs = 20;
  cfg.noise_ratio = 0.0;
  const MetricRow clean = run_experiment(ds, cfg).row;
  const double zero[] = {0.0};
  const std::uint64_t seed[] = {cfg.seed};
  for (NoiseKind k : {NoiseKind::semantic, NoiseKind::structural, NoiseKind::mixed}) {
    const NoiseKind kinds[] = {k};
    const auto r = robustness_sweep(ds, cfg, zero, kinds, seed);
    v.require(r.size() == 1 && r[0].accuracy == clean.accuracy &&
                  r[0].macro_f1 == clean.macro_f1,
              std::string(to_string(k)) + " ratio 0 differs from the clean run");
  }
  bool exact = true;
  for (double ratio : {0.1, 0.25, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    const NoiseSpec spec{NoiseKind::mixed, ratio, NoiseScope::all, 9};
    const Dataset sem = inject_semantic(ds, spec);
    const Dataset str = inject_structural(ds, spec);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      std::size_t zeros = 0;
      for (const auto& f : sem.samples[i].node_features)
        zeros += std::all_of(f.begin(), f.end(), [](double x) { return x == 0.0; });
      const auto& s = ds.samples[i];
      exact = exact && zeros == static_cast<std::size_t>(std::floor(ratio * s.node_count() + 1e-9));
      exact = exact && s.edges.size() - str.samples[i].edges.size() ==
                           static_cast<std::size_t>(std::floor(ratio * s.edges.size() + 1e-9));
    }
  }
  v.require(exact, "masked counts differ from floor(ratio*n)");
  RunConfig grid = cfg;
  grid.max_epochs = 2;
  const double ratios[] = {0.0, 0.3, 0.5, 0.7, 0.9};
  const NoiseKind kinds[] = {NoiseKind::semantic, NoiseKind::structural, NoiseKind::mixed};
  const auto rows = robustness_sweep(ds, grid, ratios, kinds, kSeeds);
  v.require(rows.size() == 75, std::to_string(rows.size()) + " rows");
  v.note("ratio 0 == clean (3 kinds), exact counts, " + std::to_string(rows.size()) + " rows");
  return v;
}

Verdict ac8() {
  Verdict v;
  const fs::path dir = fs::temp_directory_path() / "psstl-acceptance-ac8";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream sink;
  const std::string data = (dir / "d.jsonl").string();
  v.require(cli::run({"gen", "--news", "60", "--seed", "8", "--out", data}, sink, sink) == 0,
            "gen failed");
  for (const char* run : {"a", "b"}) {
    const int code = cli::run({"train", "--data", data, "--out", (dir / run).string(),
                               "--noise-ratio", "0.3", "--max-epochs", "40"},
                              sink, sink);
    v.require(code == 0, std::string("train ") + run + " exited " + std::to_string(code));
  }
  for (const char* f : {"metrics.csv", "content.json", "propagation.json", "student.json"}) {
    v.require(slurp(dir / "a" / f) == slurp(dir / "b" / f) && !slurp(dir / "a" / f).empty(),
              std::string(f) + " differs between runs");
  }
  const Dataset ds = load_dataset(data);
  const std::string text = serialize_dataset(ds);
  std::istringstream in(text);
  const Dataset back = read_dataset(in);
  v.require(back == ds && serialize_dataset(back) == text, "dataset round trip not bit-exact");
  const Split s = split_dataset(314, 1);
  v.require(s.train.size() == 219 && s.val.size() == 31 && s.test.size() == 64,
            "split sizes " + std::to_string(s.train.size()) + "/" + std::to_string(s.val.size()) +
                "/" + std::to_string(s.test.size()));
  v.note("metrics + checkpoints byte-identical; round trip exact; 314 -> 219/31/64");
  fs::remove_all(dir);
  return v;
}

Verdict ac9() {
  Verdict v;
  const std::vector<int> preds{1, 0, 1, 1}, labels{1, 0, 0, 1};
  const std::string acc = format_fixed(accuracy(preds, labels), 6);
  const std::string f1 = format_fixed(macro_f1(preds, labels), 6);
  v.require(acc == "0.750000", "accuracy " + acc);
  v.require(f1 == "0.733333", "macro-F1 " + f1);
  v.note("accuracy " + acc + ", macro-F1 " + f1);
  return v;
}

}  // namespace

int main() {
  report("AC1", "gradient fidelity", ac1);
  report("AC2", "loss composition", ac2);
  report("AC3", "closed-form losses", ac3);
  report("AC4", "graph construction", ac4);
  const Dataset bench = generate_synthetic(benchmark_params());
  report("AC5", "synthetic benchmark direction", [&] { return ac5(bench); });
  report("AC6", "ablation harness", [&] { return ac6(bench); });
  report("AC7", "robustness protocol mechanics", ac7);
  report("AC8", "determinism and persistence", ac8);
  report("AC9", "metric correctness", ac9);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
