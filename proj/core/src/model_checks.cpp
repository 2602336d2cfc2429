// SPDX-License-Identifier: Apache-2.0
#include "psstl/model_checks.hpp"

#include <numeric>

#include "psstl/distill.hpp"
#include "psstl/global_graph.hpp"
#include "psstl/losses.hpp"
#include "psstl/rng.hpp"
#include "psstl/student.hpp"
#include "psstl/teachers.hpp"

namespace psstl {

namespace {

// Folds the sign pattern of every pre-activation into a hash.
class Signature {
 public:
  void add(const Matrix& pre) {
    for (double v : pre.data()) {
      h_ = (h_ ^ (v > 0.0 ? 0x9eU : 0x3bU)) * 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::vector<ModelGradCheck> run_model_grad_checks(const Dataset& ds, const RunConfig& cfg,
                                                  double h) {
  const std::vector<int> labels = ds.labels();
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const Matrix x_news = news_feature_matrix(ds);
  const Matrix a_news = build_global_graph(build_engagement_matrix(ds));
  const PropagationInputs p_in = make_propagation_inputs(a_news);
  const StudentInputs s_in = make_student_inputs(ds, a_news);
  GradCheckOptions options;
  options.h = h;
  options.seed = cfg.seed;

  std::vector<ModelGradCheck> out;

  Rng ct_rng(derive_seed(cfg.seed, "init/content"));
  ContentTeacher ct(ds.feature_dim, cfg.hidden_dim, cfg.final_relu, ct_rng);
  {
    auto objective = [&](bool accumulate) {
      const auto trace = ct.forward(x_news);
      const LossGrad ce = cross_entropy(trace.out.logits, labels, rows);
      if (accumulate) ct.backward(trace, ce.grad);
      return ce.value;
    };
    options.activation_signature = [&] {
      const auto trace = ct.forward(x_news);
      Signature s;
      s.add(trace.pre_hidden);
      s.add(trace.pre_logits);
      return s.value();
    };
    const auto params = ct.params();
    out.push_back({"content", grad_check(params, objective, options)});
  }

  Rng pt_rng(derive_seed(cfg.seed, "init/propagation"));
  PropagationTeacher pt(ds.size(), cfg.pe_dim, cfg.hidden_dim, cfg.refiner_hidden,
                        cfg.final_relu, pt_rng);
  {
    auto objective = [&](bool accumulate) {
      const auto trace = pt.forward(p_in);
      const LossGrad ce = cross_entropy(trace.out.logits, labels, rows);
      if (accumulate) pt.backward(p_in, trace, ce.grad);
      return ce.value;
    };
    options.activation_signature = [&] {
      const auto trace = pt.forward(p_in);
      Signature s;
      s.add(trace.retention.pre_hidden);
      s.add(trace.pre_hidden);
      s.add(trace.pre_logits);
      return s.value();
    };
    const auto params = pt.params();
    out.push_back({"propagation", grad_check(params, objective, options)});
  }

  {
    const TeacherOutput ct_out = ct.forward(x_news).out;
    const TeacherOutput pt_out = pt.forward(p_in).out;
    const TeacherSignals signals{&ct_out, &pt_out};
    const MkdConfig mkd = mkd_config(cfg);
    Rng s_rng(derive_seed(cfg.seed, "init/student"));
    StudentModel student(ds.feature_dim, cfg.hidden_dim, student_options(cfg), s_rng);
    auto objective = [&](bool accumulate) {
      const auto trace = student.forward(s_in);
      const MkdResult r = mkd_total(trace.out, signals, labels, rows, mkd);
      if (accumulate) student.backward(s_in, trace, r.grad_logits, &r.grad_hidden);
      return r.breakdown.total;
    };
    options.activation_signature = [&] {
      const auto trace = student.forward(s_in);
      Signature s;
      for (const auto& m : trace.pre_local) s.add(m);
      s.add(trace.pre_logits);
      return s.value();
    };
    const auto params = student.params();
    out.push_back({"student", grad_check(params, objective, options)});
  }
  return out;
}

}  // namespace psstl
