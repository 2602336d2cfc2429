// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "psstl/dataset.hpp"
#include "psstl/matrix.hpp"
#include "psstl/param.hpp"

namespace psstl {

enum class Pooling { mean, root };

struct StudentOptions {
  bool final_relu = true;
  Pooling pooling = Pooling::mean;
  /// false replaces the global spread with h_s = H_loc W1 + b1.
  bool use_lgpi = true;
};

struct StudentOutput {
  Matrix h_loc;   // N x h pooled local representations
  Matrix h_s;     // N x h
  Matrix logits;  // N x 2
};

/// Symmetric-normalised (undirected tree + self-loops) operator for one
/// propagation tree. Every node keeps its self-loop, so no row is zero even
/// when edges have been removed.
Matrix local_operator(const NewsSample& sample);

/// Raw A_news with each row divided by its sum; a zero row becomes the
/// identity row.
Matrix row_normalize_graph(const Matrix& a_news);

/// Parameter-independent student inputs: S_loc X_node per sample and the
/// row-normalised global graph.
struct StudentInputs {
  std::vector<Matrix> local_agg;
  Matrix a_rownorm;
};

StudentInputs make_student_inputs(const Dataset& ds, const Matrix& a_news);

/// Local GCN + pooling, LGPI and a classification head:
///   H_loc[i] = pool(ReLU(S_loc X_node W_loc + b_loc))
///   h_s      = (P H_loc) W1 + b1          (P = row-normalised A_news)
///   logits   = ReLU(h_s W2 + b2)
class StudentModel {
 public:
  struct Trace {
    std::vector<Matrix> pre_local;  // per sample, n_i x h
    Matrix agg;                     // P H_loc, or H_loc without LGPI
    Matrix pre_logits;
    StudentOutput out;
  };

  StudentModel() = default;
  StudentModel(std::size_t in_dim, std::size_t hidden_dim, StudentOptions options, Rng& rng);

  Trace forward(const StudentInputs& in) const;
  void backward(const StudentInputs& in, const Trace& trace, const Matrix& grad_logits,
                const Matrix* grad_hs = nullptr);

  ParamList params() { return {&gcn_w, &gcn_b, &w1, &b1, &w2, &b2}; }
  double relu_margin(const Trace& trace) const;

  Param gcn_w;  // d x h
  Param gcn_b;
  Param w1;     // h x h
  Param b1;
  Param w2;     // h x 2
  Param b2;
  StudentOptions options;
};

/// Node embeddings ReLU(S_loc X W_loc + b_loc) for one sample.
Matrix local_gcn_forward(const StudentModel& model, const NewsSample& sample);
/// 1 x h pooled vector. Mean pooling sums each column in sorted order, so
/// the result does not depend on node order.
Matrix pool_local(const Matrix& node_embeddings, Pooling pooling = Pooling::mean);
/// (P H_loc) W1 + b1.
Matrix lgpi_forward(const StudentModel& model, const Matrix& h_loc, const Matrix& a_rownorm);
Matrix student_head(const StudentModel& model, const Matrix& h_s);
StudentOutput student_forward(const StudentModel& model, const Dataset& ds, const Matrix& a_news);

}  // namespace psstl
