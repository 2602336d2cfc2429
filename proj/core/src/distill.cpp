// SPDX-License-Identifier: Apache-2.0
#include "psstl/distill.hpp"

#include <algorithm>
#include <cmath>

#include "fit.hpp"
#include "psstl/errors.hpp"
#include "psstl/metrics.hpp"
#include "psstl/text_format.hpp"

namespace psstl {

void validate_mkd_config(const MkdConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw ConfigError("lambda must be in [0,1]");
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw ConfigError("beta must be in [0,1]");
  if (!(cfg.rho > 0.0)) throw ConfigError("rho must be > 0");
}

LossGrad sup_loss(const Matrix& z_s, const Matrix& z_t, double rho, bool reverse_kl) {
  require_same_shape(z_s, z_t, "sup_loss");
  const Matrix p = softmax_rows(z_s, rho);
  const Matrix q = softmax_rows(z_t, rho);
  const Matrix log_p = log_softmax_rows(z_s, rho);
  LossGrad out{reverse_kl ? kl_rows(q, p) : kl_rows(p, q), Matrix(z_s.rows(), z_s.cols())};
  const double inv_rows = 1.0 / static_cast<double>(z_s.rows());
  for (std::size_t i = 0; i < z_s.rows(); ++i) {
    auto g = out.grad.row(i);
    if (reverse_kl) {
      // d/dz [-sum q log p] = (p - q) / rho
      for (std::size_t k = 0; k < g.size(); ++k) g[k] = (p(i, k) - q(i, k)) / rho * inv_rows;
      continue;
    }
    // d/dz sum p (log p - log q) = p o (g - <p, g>) / rho with g = log p - log q
    double mean = 0.0;
    std::vector<double> diff(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      diff[k] = log_p(i, k) - std::log(std::max(q(i, k), kKlClampFloor));
      mean += p(i, k) * diff[k];
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] = p(i, k) * (diff[k] - mean) / rho * inv_rows;
    }
  }
  return out;
}

LossGrad tar_loss(const Matrix& h_s, const Matrix& h_t) {
  require_same_shape(h_s, h_t, "tar_loss");
  const std::size_t n = h_s.rows();
  if (n == 0) throw ParameterError("tar_loss: no rows");
  const Matrix sims = matmul_nt(h_s, h_t);
  const Matrix probs = softmax_rows(sims);
  const Matrix log_probs = log_softmax_rows(sims);
  const double inv = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  Matrix grad_sims(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    loss -= log_probs(i, i);
    for (std::size_t j = 0; j < n; ++j) grad_sims(i, j) = probs(i, j) * inv;
    grad_sims(i, i) -= inv;
  }
  return {loss * inv, matmul(grad_sims, h_t)};
}

MkdCoefficients mkd_coefficients(const MkdConfig& cfg) {
  MkdCoefficients c;
  if (cfg.use_pt) {
    c.sup_pt = cfg.use_sup ? cfg.lambda : 0.0;
    c.tar_pt = cfg.use_tar ? cfg.beta : 0.0;
  }
  if (cfg.use_ct) {
    c.sup_ct = cfg.use_sup ? 1.0 - cfg.lambda : 0.0;
    c.tar_ct = cfg.use_tar ? 1.0 - cfg.beta : 0.0;
  }
  return c;
}

double combine_terms(const LossBreakdown& t, const MkdConfig& cfg) {
  const MkdCoefficients c = mkd_coefficients(cfg);
  double total = t.cls;
  if (c.sup_pt != 0.0) total += c.sup_pt * t.sup_pt;
  if (c.tar_pt != 0.0) total += c.tar_pt * t.tar_pt;
  if (c.sup_ct != 0.0) total += c.sup_ct * t.sup_ct;
  if (c.tar_ct != 0.0) total += c.tar_ct * t.tar_ct;
  return total;
}

namespace {

void scatter_add(Matrix& target, std::span<const std::size_t> rows, double coef,
                 const Matrix& grad) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto dst = target.row(rows[k]);
    auto src = grad.row(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += coef * src[j];
  }
}

}  // namespace

MkdResult mkd_total(const StudentOutput& student, const TeacherSignals& teachers,
                    std::span<const int> labels, std::span<const std::size_t> rows,
                    const MkdConfig& cfg) {
  validate_mkd_config(cfg);
  const bool needs_teacher = cfg.use_sup || cfg.use_tar;
  if (needs_teacher && cfg.use_ct && teachers.content == nullptr) {
    throw ConfigError("content teacher enabled but no content teacher output supplied");
  }
  if (needs_teacher && cfg.use_pt && teachers.propagation == nullptr) {
    throw ConfigError("propagation teacher enabled but no propagation teacher output supplied");
  }
  const MkdCoefficients coef = mkd_coefficients(cfg);

  MkdResult r;
  const auto ce = cross_entropy(student.logits, labels, rows);
  r.breakdown.cls = ce.value;
  r.grad_logits = ce.grad;
  r.grad_hidden = Matrix(student.h_s.rows(), student.h_s.cols());

  const Matrix z_s = gather_rows(student.logits, rows);
  const Matrix h_s = gather_rows(student.h_s, rows);

  auto teacher_terms = [&](const TeacherOutput& t, double sup_coef, double tar_coef,
                           double& sup_value, double& tar_value) {
    if (cfg.use_sup) {
      const auto sup = sup_loss(z_s, gather_rows(t.logits, rows), cfg.rho, cfg.reverse_kl);
      sup_value = sup.value;
      if (sup_coef != 0.0) scatter_add(r.grad_logits, rows, sup_coef, sup.grad);
    }
    if (cfg.use_tar) {
      const auto tar = tar_loss(h_s, gather_rows(t.hidden, rows));
      tar_value = tar.value;
      if (tar_coef != 0.0) scatter_add(r.grad_hidden, rows, tar_coef, tar.grad);
    }
  };
  if (cfg.use_pt && needs_teacher) {
    teacher_terms(*teachers.propagation, coef.sup_pt, coef.tar_pt, r.breakdown.sup_pt,
                  r.breakdown.tar_pt);
  }
  if (cfg.use_ct && needs_teacher) {
    teacher_terms(*teachers.content, coef.sup_ct, coef.tar_ct, r.breakdown.sup_ct,
                  r.breakdown.tar_ct);
  }
  r.breakdown.total = combine_terms(r.breakdown, cfg);
  return r;
}

StudentTrainResult train_student(StudentModel& model, const StudentInputs& inputs,
                                 const TeacherSignals& teachers, std::span<const int> labels,
                                 const Split& split, const MkdConfig& cfg,
                                 const TrainOptions& options) {
  validate_mkd_config(cfg);
  if (model.options.use_lgpi != cfg.use_lgpi) {
    throw ConfigError("student architecture and MkdConfig disagree on use_lgpi");
  }
  std::vector<LossBreakdown> losses;
  auto step = [&](std::size_t epoch) {
    const auto trace = model.forward(inputs);
    const auto mkd = mkd_total(trace.out, teachers, labels, split.train, cfg);
    const auto& b = mkd.breakdown;
    if (!std::isfinite(b.total)) {
      throw NumericError("student diverged at epoch " + std::to_string(epoch) +
                         ": cls=" + format_diagnostic(b.cls) + " sup_pt=" + format_diagnostic(b.sup_pt) +
                         " tar_pt=" + format_diagnostic(b.tar_pt) + " sup_ct=" +
                         format_diagnostic(b.sup_ct) + " tar_ct=" + format_diagnostic(b.tar_ct));
    }
    model.backward(inputs, trace, mkd.grad_logits, &mkd.grad_hidden);
    losses.push_back(b);
    return b.total;
  };
  auto validate = [&] {
    const auto logits = model.forward(inputs).out.logits;
    detail::ValidationScore s;
    if (split.val.empty()) return s;
    s.loss = cross_entropy(logits, labels, split.val).value;
    const auto m = evaluate(argmax_rows(logits), labels, split.val);
    s.accuracy = m.accuracy;
    s.macro_f1 = m.macro_f1;
    return s;
  };
  auto fitted = detail::fit(model.params(), options, step, validate);
  StudentTrainResult out;
  out.best_epoch = fitted.best_epoch;
  out.best_val_macro_f1 = fitted.best_val_macro_f1;
  for (std::size_t k = 0; k < fitted.history.size(); ++k) {
    out.history.push_back({fitted.history[k], losses[k]});
  }
  return out;
}

}  // namespace psstl
