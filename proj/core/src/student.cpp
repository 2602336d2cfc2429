// SPDX-License-Identifier: Apache-2.0
#include "psstl/student.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psstl/errors.hpp"

namespace psstl {

Matrix local_operator(const NewsSample& sample) {
  const std::size_t n = sample.node_count();
  if (n == 0) throw ValidationError("sample '" + sample.id + "': empty node list");
  Matrix a = Matrix::identity(n);
  for (const auto& e : sample.edges) {
    if (e.parent >= n || e.child >= n) {
      throw ValidationError("sample '" + sample.id + "': edge index out of range");
    }
    a(e.parent, e.child) = 1.0;
    a(e.child, e.parent) = 1.0;
  }
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double v : a.row(i)) deg += v;
    r[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) *= r[i] * r[j];
  return a;
}

Matrix row_normalize_graph(const Matrix& a_news) {
  if (a_news.rows() != a_news.cols()) throw DimensionError("row_normalize_graph: not square");
  Matrix p(a_news.rows(), a_news.cols());
  for (std::size_t i = 0; i < a_news.rows(); ++i) {
    double s = 0.0;
    for (double v : a_news.row(i)) s += v;
    if (s == 0.0) {
      p(i, i) = 1.0;
      continue;
    }
    for (std::size_t j = 0; j < a_news.cols(); ++j) p(i, j) = a_news(i, j) / s;
  }
  return p;
}

namespace {

Matrix node_feature_matrix(const NewsSample& s) {
  const std::size_t d = s.node_features.empty() ? 0 : s.node_features[0].size();
  Matrix x(s.node_count(), d);
  for (std::size_t i = 0; i < s.node_count(); ++i) {
    if (s.node_features[i].size() != d) throw DimensionError("ragged node features");
    std::copy(s.node_features[i].begin(), s.node_features[i].end(), x.row(i).begin());
  }
  return x;
}

}  // namespace

StudentInputs make_student_inputs(const Dataset& ds, const Matrix& a_news) {
  if (a_news.rows() != ds.size()) {
    throw DimensionError("student inputs: " + std::to_string(ds.size()) +
                         " samples but global graph is " + a_news.shape_string());
  }
  StudentInputs in;
  in.local_agg.reserve(ds.size());
  for (const auto& s : ds.samples) {
    in.local_agg.push_back(matmul(local_operator(s), node_feature_matrix(s)));
  }
  in.a_rownorm = row_normalize_graph(a_news);
  return in;
}

StudentModel::StudentModel(std::size_t in_dim, std::size_t hidden_dim, StudentOptions options_,
                           Rng& rng)
    : gcn_w("student.gcn_loc.w", glorot_uniform(in_dim, hidden_dim, rng)),
      gcn_b("student.gcn_loc.b", Matrix(1, hidden_dim)),
      w1("student.lgpi.w1", glorot_uniform(hidden_dim, hidden_dim, rng)),
      b1("student.lgpi.b1", Matrix(1, hidden_dim)),
      w2("student.head.w2", glorot_uniform(hidden_dim, 2, rng)),
      b2("student.head.b2", Matrix(1, 2)),
      options(options_) {}

Matrix pool_local(const Matrix& node_embeddings, Pooling pooling) {
  if (node_embeddings.rows() == 0) throw ValidationError("pool_local: no nodes");
  Matrix out(1, node_embeddings.cols());
  if (pooling == Pooling::root) {
    std::copy_n(node_embeddings.row(0).data(), node_embeddings.cols(), out.row(0).data());
    return out;
  }
  std::vector<double> column(node_embeddings.rows());
  for (std::size_t j = 0; j < node_embeddings.cols(); ++j) {
    for (std::size_t i = 0; i < node_embeddings.rows(); ++i) column[i] = node_embeddings(i, j);
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double v : column) s += v;
    out(0, j) = s / static_cast<double>(node_embeddings.rows());
  }
  return out;
}

namespace {

Matrix local_pre_activation(const StudentModel& m, const Matrix& agg) {
  if (agg.cols() != m.gcn_w.value.rows()) {
    throw DimensionError("student: node features " + agg.shape_string() +
                         " do not match local GCN input " + m.gcn_w.value.shape_string());
  }
  Matrix z = matmul(agg, m.gcn_w.value);
  add_row_inplace(z, m.gcn_b.value);
  return z;
}

}  // namespace

Matrix local_gcn_forward(const StudentModel& model, const NewsSample& sample) {
  return relu(local_pre_activation(model, matmul(local_operator(sample),
                                                 node_feature_matrix(sample))));
}

Matrix lgpi_forward(const StudentModel& model, const Matrix& h_loc, const Matrix& a_rownorm) {
  if (a_rownorm.rows() != h_loc.rows() || a_rownorm.cols() != h_loc.rows()) {
    throw DimensionError("lgpi: graph " + a_rownorm.shape_string() + " vs H_loc " +
                         h_loc.shape_string());
  }
  Matrix h_s = matmul(matmul(a_rownorm, h_loc), model.w1.value);
  add_row_inplace(h_s, model.b1.value);
  return h_s;
}

Matrix student_head(const StudentModel& model, const Matrix& h_s) {
  Matrix z = matmul(h_s, model.w2.value);
  add_row_inplace(z, model.b2.value);
  return model.options.final_relu ? relu(z) : z;
}

StudentModel::Trace StudentModel::forward(const StudentInputs& in) const {
  const std::size_t n = in.local_agg.size();
  Trace t;
  t.pre_local.reserve(n);
  t.out.h_loc = Matrix(n, gcn_w.value.cols());
  for (std::size_t i = 0; i < n; ++i) {
    t.pre_local.push_back(local_pre_activation(*this, in.local_agg[i]));
    const Matrix pooled = pool_local(relu(t.pre_local.back()), options.pooling);
    std::copy_n(pooled.row(0).data(), pooled.cols(), t.out.h_loc.row(i).data());
  }
  if (options.use_lgpi) {
    if (in.a_rownorm.rows() != n) throw DimensionError("student: global graph size mismatch");
    t.agg = matmul(in.a_rownorm, t.out.h_loc);
  } else {
    t.agg = t.out.h_loc;
  }
  t.out.h_s = matmul(t.agg, w1.value);
  add_row_inplace(t.out.h_s, b1.value);
  t.pre_logits = matmul(t.out.h_s, w2.value);
  add_row_inplace(t.pre_logits, b2.value);
  t.out.logits = options.final_relu ? relu(t.pre_logits) : t.pre_logits;
  return t;
}

void StudentModel::backward(const StudentInputs& in, const Trace& t, const Matrix& grad_logits,
                            const Matrix* grad_hs) {
  const Matrix grad_pre = options.final_relu ? relu_backward(grad_logits, t.pre_logits)
                                             : grad_logits;
  add_inplace(w2.grad, matmul_tn(t.out.h_s, grad_pre));
  add_inplace(b2.grad, column_sums(grad_pre));
  Matrix grad_h_s = matmul_nt(grad_pre, w2.value);
  if (grad_hs != nullptr) add_inplace(grad_h_s, *grad_hs);
  add_inplace(w1.grad, matmul_tn(t.agg, grad_h_s));
  add_inplace(b1.grad, column_sums(grad_h_s));
  const Matrix grad_agg = matmul_nt(grad_h_s, w1.value);
  const Matrix grad_h_loc = options.use_lgpi ? matmul_tn(in.a_rownorm, grad_agg) : grad_agg;

  for (std::size_t i = 0; i < t.pre_local.size(); ++i) {
    const Matrix& pre = t.pre_local[i];
    const std::size_t nodes = pre.rows();
    Matrix grad_emb(nodes, pre.cols());
    if (options.pooling == Pooling::root) {
      std::copy_n(grad_h_loc.row(i).data(), pre.cols(), grad_emb.row(0).data());
    } else {
      const double inv = 1.0 / static_cast<double>(nodes);
      for (std::size_t k = 0; k < nodes; ++k)
        for (std::size_t j = 0; j < pre.cols(); ++j) grad_emb(k, j) = grad_h_loc(i, j) * inv;
    }
    const Matrix grad_local = relu_backward(grad_emb, pre);
    add_inplace(gcn_w.grad, matmul_tn(in.local_agg[i], grad_local));
    add_inplace(gcn_b.grad, column_sums(grad_local));
  }
}

double StudentModel::relu_margin(const Trace& t) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& pre : t.pre_local) m = std::min(m, min_abs(pre));
  if (options.final_relu) m = std::min(m, min_abs(t.pre_logits));
  return m;
}

StudentOutput student_forward(const StudentModel& model, const Dataset& ds,
                              const Matrix& a_news) {
  return model.forward(make_student_inputs(ds, a_news)).out;
}

}  // namespace psstl
