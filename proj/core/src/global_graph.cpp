// SPDX-License-Identifier: Apache-2.0
#include "psstl/global_graph.hpp"

#include <cmath>
#include <fstream>

#include "psstl/errors.hpp"
#include "psstl/losses.hpp"
#include "psstl/text_format.hpp"

namespace psstl {

Matrix build_engagement_matrix(const Dataset& ds) {
  Matrix e(ds.size(), ds.user_index.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (const auto& eng : ds.samples[i].engagements) {
      const auto it = ds.user_index.find(eng.user);
      if (it == ds.user_index.end()) {
        throw ValidationError("engagement matrix: user '" + eng.user +
                              "' missing from user index");
      }
      e(i, it->second) += static_cast<double>(eng.count);
    }
  }
  return e;
}

Matrix build_global_graph(const Matrix& engagement) { return matmul_nt(engagement, engagement); }

std::vector<double> node_degrees(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("node_degrees: matrix is not square");
  const std::size_t n = a.rows();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-9) {
        throw ValidationError("node_degrees: matrix is not symmetric at (" + std::to_string(i) +
                              "," + std::to_string(j) + ")");
      }
      if (j != i) d[i] += a(i, j);
    }
  }
  return d;
}

PositionalEncoder::PositionalEncoder(std::size_t n_news, std::size_t dim, Rng& rng,
                                     const std::string& prefix)
    : w(prefix + ".w", glorot_uniform(n_news, dim, rng)), b(prefix + ".b", Matrix(1, dim)) {}

Matrix positional_encoding(const PositionalEncoder& pe, std::span<const std::size_t> indices) {
  Matrix out = gather_rows(pe.w.value, indices);
  add_row_inplace(out, pe.b.value);
  return out;
}

void positional_encoding_backward(PositionalEncoder& pe, std::span<const std::size_t> indices,
                                  const Matrix& grad) {
  if (grad.rows() != indices.size() || grad.cols() != pe.w.value.cols()) {
    throw DimensionError("positional_encoding_backward: gradient shape " + grad.shape_string());
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    auto src = grad.row(k);
    auto dst = pe.w.grad.row(indices[k]);
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] += src[j];
      pe.b.grad(0, j) += src[j];
    }
  }
}

EdgeRefiner::EdgeRefiner(std::size_t hidden, Rng& rng, const std::string& prefix)
    : w1(prefix + ".w1", glorot_uniform(3, hidden, rng)),
      b1(prefix + ".b1", Matrix(1, hidden)),
      w2(prefix + ".w2", glorot_uniform(hidden, 2, rng)),
      b2(prefix + ".b2", Matrix(1, 2)) {}

RetentionInputs make_retention_inputs(const Matrix& a, std::span<const double> degrees) {
  if (a.rows() != a.cols() || degrees.size() != a.rows()) {
    throw DimensionError("retention inputs: adjacency " + a.shape_string() + " with " +
                         std::to_string(degrees.size()) + " degrees");
  }
  RetentionInputs in;
  in.n = a.rows();
  for (std::size_t i = 0; i < in.n; ++i)
    for (std::size_t j = 0; j < in.n; ++j)
      if (i != j && a(i, j) != 0.0) in.pairs.emplace_back(i, j);
  in.features = Matrix(in.pairs.size(), 3);
  for (std::size_t k = 0; k < in.pairs.size(); ++k) {
    const auto [i, j] = in.pairs[k];
    in.features(k, 0) = std::log1p(a(i, j));
    in.features(k, 1) = std::log1p(degrees[i]);
    in.features(k, 2) = std::log1p(degrees[j]);
  }
  return in;
}

RetentionTrace edge_retention_forward(const RetentionInputs& in, const EdgeRefiner& refiner) {
  RetentionTrace t;
  t.m = Matrix(in.n, in.n);
  if (in.pairs.empty()) return t;
  t.pre_hidden = matmul(in.features, refiner.w1.value);
  add_row_inplace(t.pre_hidden, refiner.b1.value);
  t.hidden = relu(t.pre_hidden);
  Matrix logits = matmul(t.hidden, refiner.w2.value);
  add_row_inplace(logits, refiner.b2.value);
  t.probs = softmax_rows(logits);
  for (std::size_t k = 0; k < in.pairs.size(); ++k) {
    const auto [i, j] = in.pairs[k];
    t.m(i, j) += 0.5 * t.probs(k, 0);
    t.m(j, i) += 0.5 * t.probs(k, 0);
  }
  return t;
}

void edge_retention_backward(const RetentionInputs& in, const RetentionTrace& trace,
                             const Matrix& grad_m, EdgeRefiner& refiner) {
  if (in.pairs.empty()) return;
  Matrix grad_logits(in.pairs.size(), 2);
  for (std::size_t k = 0; k < in.pairs.size(); ++k) {
    const auto [i, j] = in.pairs[k];
    const double g_keep = 0.5 * (grad_m(i, j) + grad_m(j, i));
    const double p0 = trace.probs(k, 0);
    const double p1 = trace.probs(k, 1);
    grad_logits(k, 0) = g_keep * p0 * (1.0 - p0);
    grad_logits(k, 1) = -g_keep * p0 * p1;
  }
  add_inplace(refiner.w2.grad, matmul_tn(trace.hidden, grad_logits));
  add_inplace(refiner.b2.grad, column_sums(grad_logits));
  const Matrix grad_pre =
      relu_backward(matmul_nt(grad_logits, refiner.w2.value), trace.pre_hidden);
  add_inplace(refiner.w1.grad, matmul_tn(in.features, grad_pre));
  add_inplace(refiner.b1.grad, column_sums(grad_pre));
}

Matrix edge_retention(const Matrix& a, std::span<const double> degrees,
                      const EdgeRefiner& refiner) {
  return edge_retention_forward(make_retention_inputs(a, degrees), refiner).m;
}

Matrix refine(const Matrix& a, const Matrix& m) {
  if (a.rows() != a.cols()) throw DimensionError("refine: adjacency is not square");
  Matrix out = hadamard(a, m);
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
  return out;
}

Matrix gcn_normalize(const Matrix& a_hat) {
  if (a_hat.rows() != a_hat.cols()) throw DimensionError("gcn_normalize: not square");
  const std::size_t n = a_hat.rows();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double v : a_hat.row(i)) deg += v;
    if (!(deg > 0.0)) {
      throw ValidationError("gcn_normalize: row " + std::to_string(i) + " has zero degree");
    }
    r[i] = 1.0 / std::sqrt(deg);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = a_hat(i, j) * r[i] * r[j];
  return out;
}

Matrix gcn_normalize_backward(const Matrix& a_hat, const Matrix& grad_norm) {
  require_same_shape(a_hat, grad_norm, "gcn_normalize_backward");
  const std::size_t n = a_hat.rows();
  std::vector<double> deg(n, 0.0), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : a_hat.row(i)) deg[i] += v;
    r[i] = 1.0 / std::sqrt(deg[i]);
  }
  // S_ij = a_ij r_i r_j, r_i = deg_i^{-1/2}, deg_i = sum_j a_ij.
  std::vector<double> grad_r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double g = grad_norm(i, j) * a_hat(i, j);
      grad_r[i] += g * r[j];
      grad_r[j] += g * r[i];
    }
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double grad_deg = -0.5 * r[i] / deg[i] * grad_r[i];
    for (std::size_t j = 0; j < n; ++j) out(i, j) = grad_norm(i, j) * r[i] * r[j] + grad_deg;
  }
  return out;
}

GlobalGraph make_global_graph(const Dataset& ds, const EdgeRefiner& refiner) {
  GlobalGraph g;
  g.a_news = build_global_graph(build_engagement_matrix(ds));
  g.degrees = node_degrees(g.a_news);
  g.m = edge_retention(g.a_news, g.degrees, refiner);
  g.a_refined = refine(g.a_news, g.m);
  g.a_norm = gcn_normalize(g.a_refined);
  return g;
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_exact(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace psstl
