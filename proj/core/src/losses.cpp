// SPDX-License-Identifier: Apache-2.0
#include "psstl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psstl/errors.hpp"

namespace psstl {

namespace {

void require_temperature(double temperature) {
  if (!(temperature > 0.0)) {
    throw ParameterError("softmax temperature must be > 0, got " + std::to_string(temperature));
  }
}

double row_max(std::span<const double> r) { return *std::max_element(r.begin(), r.end()); }

}  // namespace

Matrix softmax_rows(const Matrix& z, double temperature) {
  require_temperature(temperature);
  Matrix out(z.rows(), z.cols());
  if (z.cols() == 0) return out;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto in = z.row(i);
    auto o = out.row(i);
    const double m = row_max(in);
    double sum = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp((in[j] - m) / temperature);
      sum += o[j];
    }
    for (double& v : o) v /= sum;
  }
  return out;
}

Matrix log_softmax_rows(const Matrix& z, double temperature) {
  require_temperature(temperature);
  Matrix out(z.rows(), z.cols());
  if (z.cols() == 0) return out;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto in = z.row(i);
    auto o = out.row(i);
    const double m = row_max(in);
    double sum = 0.0;
    for (double v : in) sum += std::exp((v - m) / temperature);
    const double lse = std::log(sum);
    for (std::size_t j = 0; j < in.size(); ++j) o[j] = (in[j] - m) / temperature - lse;
  }
  return out;
}

double kl_rows(const Matrix& p, const Matrix& q) {
  require_same_shape(p, q, "kl_rows");
  if (p.rows() == 0) throw ParameterError("kl_rows: no rows");
  constexpr double kTol = 1e-9;
  auto check_row = [&](std::span<const double> r, const char* which, std::size_t i) {
    double s = 0.0;
    for (double v : r) {
      if (!(v >= 0.0)) {
        throw ValidationError(std::string("kl_rows: ") + which + " row " + std::to_string(i) +
                              " has a negative or non-finite entry");
      }
      s += v;
    }
    if (std::abs(s - 1.0) > kTol) {
      throw ValidationError(std::string("kl_rows: ") + which + " row " + std::to_string(i) +
                            " sums to " + std::to_string(s) + ", not 1");
    }
  };
  double total = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto pr = p.row(i);
    auto qr = q.row(i);
    check_row(pr, "p", i);
    check_row(qr, "q", i);
    double row_kl = 0.0;
    for (std::size_t j = 0; j < pr.size(); ++j) {
      if (pr[j] == 0.0) continue;
      row_kl += pr[j] * std::log(pr[j] / std::max(qr[j], kKlClampFloor));
    }
    total += row_kl;
  }
  return total / static_cast<double>(p.rows());
}

LossGrad cross_entropy(const Matrix& logits, std::span<const int> labels,
                       std::span<const std::size_t> mask) {
  if (mask.empty()) throw ParameterError("cross_entropy: empty mask");
  if (labels.size() != logits.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         logits.shape_string() + " logits");
  }
  LossGrad out{0.0, Matrix(logits.rows(), logits.cols())};
  const Matrix logp = log_softmax_rows(logits);
  const double inv = 1.0 / static_cast<double>(mask.size());
  for (std::size_t idx : mask) {
    if (idx >= logits.rows()) {
      throw DimensionError("cross_entropy: mask index " + std::to_string(idx) + " out of range");
    }
    const int y = labels[idx];
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) {
      throw ValidationError("cross_entropy: label " + std::to_string(y) + " at row " +
                            std::to_string(idx) + " outside class count " +
                            std::to_string(logits.cols()));
    }
    out.value -= logp(idx, static_cast<std::size_t>(y));
    auto g = out.grad.row(idx);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += std::exp(logp(idx, j)) * inv;
    g[static_cast<std::size_t>(y)] -= inv;
  }
  out.value *= inv;
  return out;
}

std::vector<int> argmax_rows(const Matrix& z) {
  std::vector<int> out(z.rows(), 0);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j)
      if (r[j] > r[best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace psstl
