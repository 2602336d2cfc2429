// SPDX-License-Identifier: Apache-2.0
#include "psstl/teachers.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "fit.hpp"
#include "psstl/errors.hpp"
#include "psstl/losses.hpp"
#include "psstl/metrics.hpp"

namespace psstl {

Matrix news_feature_matrix(const Dataset& ds) {
  Matrix x(ds.size(), ds.feature_dim);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& f = ds.samples[i].news_feature;
    if (f.size() != ds.feature_dim) throw DimensionError("news feature length mismatch");
    std::copy(f.begin(), f.end(), x.row(i).begin());
  }
  return x;
}

namespace {

Matrix affine(const Matrix& x, const Param& w, const Param& b) {
  Matrix z = matmul(x, w.value);
  add_row_inplace(z, b.value);
  return z;
}

}  // namespace

// ---------------------------------------------------------------------------
// Content teacher

ContentTeacher::ContentTeacher(std::size_t in_dim, std::size_t hidden_dim, bool final_relu_,
                               Rng& rng)
    : mlp1_w("ct.mlp1.w", glorot_uniform(in_dim, hidden_dim, rng)),
      mlp1_b("ct.mlp1.b", Matrix(1, hidden_dim)),
      mlp2_w("ct.mlp2.w", glorot_uniform(hidden_dim, 2, rng)),
      mlp2_b("ct.mlp2.b", Matrix(1, 2)),
      final_relu(final_relu_) {}

ContentTeacher::Trace ContentTeacher::forward(const Matrix& x) const {
  if (x.cols() != mlp1_w.value.rows()) {
    throw DimensionError("content teacher: input " + x.shape_string() + " but weights expect " +
                         std::to_string(mlp1_w.value.rows()) + " features");
  }
  Trace t;
  t.x = x;
  t.pre_hidden = affine(x, mlp1_w, mlp1_b);
  t.out.hidden = relu(t.pre_hidden);
  t.pre_logits = affine(t.out.hidden, mlp2_w, mlp2_b);
  t.out.logits = final_relu ? relu(t.pre_logits) : t.pre_logits;
  return t;
}

void ContentTeacher::backward(const Trace& t, const Matrix& grad_logits,
                              const Matrix* grad_hidden) {
  const Matrix grad_pre2 = final_relu ? relu_backward(grad_logits, t.pre_logits) : grad_logits;
  add_inplace(mlp2_w.grad, matmul_tn(t.out.hidden, grad_pre2));
  add_inplace(mlp2_b.grad, column_sums(grad_pre2));
  Matrix grad_h = matmul_nt(grad_pre2, mlp2_w.value);
  if (grad_hidden != nullptr) add_inplace(grad_h, *grad_hidden);
  const Matrix grad_pre1 = relu_backward(grad_h, t.pre_hidden);
  add_inplace(mlp1_w.grad, matmul_tn(t.x, grad_pre1));
  add_inplace(mlp1_b.grad, column_sums(grad_pre1));
}

double ContentTeacher::relu_margin(const Trace& t) const {
  double m = min_abs(t.pre_hidden);
  if (final_relu) m = std::min(m, min_abs(t.pre_logits));
  return m;
}

// ---------------------------------------------------------------------------
// Propagation teacher

PropagationInputs make_propagation_inputs(const Matrix& a_news) {
  PropagationInputs in;
  in.a_news = a_news;
  in.degrees = node_degrees(a_news);
  in.retention = make_retention_inputs(a_news, in.degrees);
  in.nodes.resize(a_news.rows());
  std::iota(in.nodes.begin(), in.nodes.end(), std::size_t{0});
  return in;
}

PropagationTeacher::PropagationTeacher(std::size_t n_news, std::size_t pe_dim,
                                       std::size_t hidden_dim, std::size_t refiner_hidden,
                                       bool final_relu_, Rng& rng)
    : encoder(n_news, pe_dim, rng, "pt.pe"),
      refiner(refiner_hidden, rng, "pt.refiner"),
      gcn1_w("pt.gcn1.w", glorot_uniform(pe_dim, hidden_dim, rng)),
      gcn1_b("pt.gcn1.b", Matrix(1, hidden_dim)),
      gcn2_w("pt.gcn2.w", glorot_uniform(hidden_dim, 2, rng)),
      gcn2_b("pt.gcn2.b", Matrix(1, 2)),
      final_relu(final_relu_) {}

ParamList PropagationTeacher::params() {
  return {&encoder.w, &encoder.b, &refiner.w1, &refiner.b1, &refiner.w2,
          &refiner.b2, &gcn1_w,   &gcn1_b,     &gcn2_w,     &gcn2_b};
}

PropagationTeacher::Trace PropagationTeacher::forward(const PropagationInputs& in) const {
  if (in.a_news.rows() != encoder.size()) {
    throw DimensionError("propagation teacher: encoder sized for " +
                         std::to_string(encoder.size()) + " news but graph has " +
                         std::to_string(in.a_news.rows()));
  }
  Trace t;
  t.retention = edge_retention_forward(in.retention, refiner);
  t.a_refined = refine(in.a_news, t.retention.m);
  t.a_norm = gcn_normalize(t.a_refined);
  t.x_pe = positional_encoding(encoder, in.nodes);
  t.agg_x = matmul(t.a_norm, t.x_pe);
  t.pre_hidden = affine(t.agg_x, gcn1_w, gcn1_b);
  t.out.hidden = relu(t.pre_hidden);
  t.agg_h = matmul(t.a_norm, t.out.hidden);
  t.pre_logits = affine(t.agg_h, gcn2_w, gcn2_b);
  t.out.logits = final_relu ? relu(t.pre_logits) : t.pre_logits;
  return t;
}

void PropagationTeacher::backward(const PropagationInputs& in, const Trace& t,
                                  const Matrix& grad_logits, const Matrix* grad_hidden) {
  // S is symmetric, so S^T g = S g.
  const Matrix grad_pre2 = final_relu ? relu_backward(grad_logits, t.pre_logits) : grad_logits;
  add_inplace(gcn2_w.grad, matmul_tn(t.agg_h, grad_pre2));
  add_inplace(gcn2_b.grad, column_sums(grad_pre2));
  const Matrix grad_agg_h = matmul_nt(grad_pre2, gcn2_w.value);
  Matrix grad_norm = matmul_nt(grad_agg_h, t.out.hidden);
  Matrix grad_h = matmul(t.a_norm, grad_agg_h);
  if (grad_hidden != nullptr) add_inplace(grad_h, *grad_hidden);

  const Matrix grad_pre1 = relu_backward(grad_h, t.pre_hidden);
  add_inplace(gcn1_w.grad, matmul_tn(t.agg_x, grad_pre1));
  add_inplace(gcn1_b.grad, column_sums(grad_pre1));
  const Matrix grad_agg_x = matmul_nt(grad_pre1, gcn1_w.value);
  add_inplace(grad_norm, matmul_nt(grad_agg_x, t.x_pe));
  positional_encoding_backward(encoder, in.nodes, matmul(t.a_norm, grad_agg_x));

  const Matrix grad_refined = gcn_normalize_backward(t.a_refined, grad_norm);
  const Matrix grad_m = hadamard(grad_refined, in.a_news);
  edge_retention_backward(in.retention, t.retention, grad_m, refiner);
}

double PropagationTeacher::relu_margin(const Trace& t) const {
  double m = min_abs(t.pre_hidden);
  if (!t.retention.pre_hidden.empty()) m = std::min(m, min_abs(t.retention.pre_hidden));
  if (final_relu) m = std::min(m, min_abs(t.pre_logits));
  return m;
}

// ---------------------------------------------------------------------------
// Training

namespace {

detail::ValidationScore score_rows(const Matrix& logits, std::span<const int> labels,
                                   std::span<const std::size_t> rows) {
  detail::ValidationScore s;
  if (rows.empty()) return s;
  s.loss = cross_entropy(logits, labels, rows).value;
  const auto m = evaluate(argmax_rows(logits), labels, rows);
  s.accuracy = m.accuracy;
  s.macro_f1 = m.macro_f1;
  return s;
}

TeacherTrainResult to_result(detail::FitResult r) {
  return {std::move(r.history), r.best_epoch, r.best_val_macro_f1};
}

}  // namespace

TeacherTrainResult train_content_teacher(ContentTeacher& model, const Matrix& x_news,
                                         std::span<const int> labels, const Split& split,
                                         const TrainOptions& options) {
  auto step = [&](std::size_t epoch) {
    const auto trace = model.forward(x_news);
    auto ce = cross_entropy(trace.out.logits, labels, split.train);
    if (!std::isfinite(ce.value)) {
      throw NumericError("content teacher diverged at epoch " + std::to_string(epoch));
    }
    model.backward(trace, ce.grad);
    return ce.value;
  };
  auto validate = [&] { return score_rows(model.forward(x_news).out.logits, labels, split.val); };
  return to_result(detail::fit(model.params(), options, step, validate));
}

TeacherTrainResult train_propagation_teacher(PropagationTeacher& model,
                                             const PropagationInputs& inputs,
                                             std::span<const int> labels, const Split& split,
                                             const TrainOptions& options) {
  auto step = [&](std::size_t epoch) {
    const auto trace = model.forward(inputs);
    auto ce = cross_entropy(trace.out.logits, labels, split.train);
    if (!std::isfinite(ce.value)) {
      throw NumericError("propagation teacher diverged at epoch " + std::to_string(epoch));
    }
    model.backward(inputs, trace, ce.grad);
    return ce.value;
  };
  auto validate = [&] {
    return score_rows(model.forward(inputs).out.logits, labels, split.val);
  };
  return to_result(detail::fit(model.params(), options, step, validate));
}

}  // namespace psstl
