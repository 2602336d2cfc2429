// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psstl/dataset.hpp"
#include "psstl/losses.hpp"
#include "psstl/student.hpp"
#include "psstl/teachers.hpp"
#include "psstl/training.hpp"

namespace psstl {

/// Weights and switches for the student objective
///   L = CLS + lambda*sup_pt + beta*tar_pt + (1-lambda)*sup_ct + (1-beta)*tar_ct
struct MkdConfig {
  double lambda = 0.5;
  double beta = 0.5;
  double rho = 2.0;
  bool use_ct = true;
  bool use_pt = true;
  bool use_sup = true;
  bool use_tar = true;
  /// Consumed by the student architecture, not by the loss.
  bool use_lgpi = true;
  /// KL(teacher || student) instead of KL(student || teacher).
  bool reverse_kl = false;
};

/// Throws ConfigError if lambda/beta are outside [0,1] or rho <= 0.
void validate_mkd_config(const MkdConfig& cfg);

struct LossBreakdown {
  double cls = 0.0;
  double sup_pt = 0.0;
  double tar_pt = 0.0;
  double sup_ct = 0.0;
  double tar_ct = 0.0;
  double total = 0.0;
};

/// KL(softmax(z_s / rho) || softmax(z_t / rho)), mean over rows. The
/// gradient is w.r.t. z_s only; z_t is a constant. No rho^2 rescaling.
LossGrad sup_loss(const Matrix& z_s, const Matrix& z_t, double rho, bool reverse_kl = false);

/// Contrastive alignment: mean over i of
///   -log( exp<h_s,i , h_t,i> / sum_j exp<h_s,i , h_t,j> )
/// with plain dot products and every other row as a negative. The gradient
/// is w.r.t. h_s only.
LossGrad tar_loss(const Matrix& h_s, const Matrix& h_t);

/// Effective coefficients after ablation flags, in the order
/// sup_pt, tar_pt, sup_ct, tar_ct.
struct MkdCoefficients {
  double sup_pt = 0.0;
  double tar_pt = 0.0;
  double sup_ct = 0.0;
  double tar_ct = 0.0;
};
MkdCoefficients mkd_coefficients(const MkdConfig& cfg);

/// Recombines already-computed terms into the total. Zero-coefficient terms
/// are skipped rather than multiplied.
double combine_terms(const LossBreakdown& terms, const MkdConfig& cfg);

/// Frozen teacher outputs over all N news; null when that teacher is absent.
struct TeacherSignals {
  const TeacherOutput* content = nullptr;
  const TeacherOutput* propagation = nullptr;
};

struct MkdResult {
  LossBreakdown breakdown;
  Matrix grad_logits;  // N x 2
  Matrix grad_hidden;  // N x h
};

/// Full student objective on the `rows` subset. Gradients are scattered back
/// to N-row matrices. A term is evaluated whenever its teacher and loss kind
/// are enabled; its gradient is skipped when its coefficient is zero.
MkdResult mkd_total(const StudentOutput& student, const TeacherSignals& teachers,
                    std::span<const int> labels, std::span<const std::size_t> rows,
                    const MkdConfig& cfg);

struct StudentEpochRecord {
  EpochRecord epoch;
  LossBreakdown losses;
};

struct StudentTrainResult {
  std::vector<StudentEpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_macro_f1 = 0.0;
};

/// Full-batch Adam on mkd_total over split.train, early stopping on val
/// macro-F1. Teachers are read-only. A non-finite total aborts with the loss
/// breakdown in the message.
StudentTrainResult train_student(StudentModel& model, const StudentInputs& inputs,
                                 const TeacherSignals& teachers, std::span<const int> labels,
                                 const Split& split, const MkdConfig& cfg,
                                 const TrainOptions& options);

}  // namespace psstl
