// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psstl/dataset.hpp"
#include "psstl/global_graph.hpp"
#include "psstl/matrix.hpp"
#include "psstl/param.hpp"
#include "psstl/training.hpp"

namespace psstl {

struct TeacherOutput {
  Matrix hidden;  // N x h
  Matrix logits;  // N x 2
};

/// Root content features stacked as an N x d matrix.
Matrix news_feature_matrix(const Dataset& ds);

/// Two-layer perceptron over news content:
///   hidden = ReLU(x W1 + b1),  logits = ReLU(hidden W2 + b2)
/// The final ReLU can be switched off.
class ContentTeacher {
 public:
  struct Trace {
    Matrix x;
    Matrix pre_hidden;
    Matrix pre_logits;
    TeacherOutput out;
  };

  ContentTeacher() = default;
  ContentTeacher(std::size_t in_dim, std::size_t hidden_dim, bool final_relu, Rng& rng);

  Trace forward(const Matrix& x) const;
  /// Accumulates parameter gradients. grad_hidden may be null.
  void backward(const Trace& trace, const Matrix& grad_logits, const Matrix* grad_hidden = nullptr);

  ParamList params() { return {&mlp1_w, &mlp1_b, &mlp2_w, &mlp2_b}; }
  /// Smallest |pre-activation| feeding a ReLU in this trace.
  double relu_margin(const Trace& trace) const;

  Param mlp1_w;
  Param mlp1_b;
  Param mlp2_w;
  Param mlp2_b;
  bool final_relu = true;
};

/// Everything the propagation teacher needs that does not depend on its
/// parameters.
struct PropagationInputs {
  Matrix a_news;
  std::vector<double> degrees;
  RetentionInputs retention;
  std::vector<std::size_t> nodes;  // 0..N-1
};

PropagationInputs make_propagation_inputs(const Matrix& a_news);

/// Positional encodings propagated by a two-layer GCN over the refined
/// global graph:
///   M = retention(A), A_hat = A o M + I, S = D^-1/2 A_hat D^-1/2
///   hidden = ReLU(S X_pe W1 + b1),  logits = ReLU(S hidden W2 + b2)
/// M is recomputed from the refiner on every forward pass.
class PropagationTeacher {
 public:
  struct Trace {
    RetentionTrace retention;
    Matrix a_refined;
    Matrix a_norm;
    Matrix x_pe;
    Matrix agg_x;  // S X_pe
    Matrix pre_hidden;
    Matrix agg_h;  // S hidden
    Matrix pre_logits;
    TeacherOutput out;
  };

  PropagationTeacher() = default;
  PropagationTeacher(std::size_t n_news, std::size_t pe_dim, std::size_t hidden_dim,
                     std::size_t refiner_hidden, bool final_relu, Rng& rng);

  Trace forward(const PropagationInputs& in) const;
  void backward(const PropagationInputs& in, const Trace& trace, const Matrix& grad_logits,
                const Matrix* grad_hidden = nullptr);

  ParamList params();
  double relu_margin(const Trace& trace) const;

  PositionalEncoder encoder;
  EdgeRefiner refiner;
  Param gcn1_w;
  Param gcn1_b;
  Param gcn2_w;
  Param gcn2_b;
  bool final_relu = true;
};

struct TeacherTrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_macro_f1 = 0.0;
};

/// Cross-entropy on split.train only; val labels are read solely for early
/// stopping. The model is left at its best-validation checkpoint.
TeacherTrainResult train_content_teacher(ContentTeacher& model, const Matrix& x_news,
                                         std::span<const int> labels, const Split& split,
                                         const TrainOptions& options);
TeacherTrainResult train_propagation_teacher(PropagationTeacher& model,
                                             const PropagationInputs& inputs,
                                             std::span<const int> labels, const Split& split,
                                             const TrainOptions& options);

}  // namespace psstl
