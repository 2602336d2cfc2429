// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psstl/dataset.hpp"
#include "psstl/matrix.hpp"
#include "psstl/param.hpp"

namespace psstl {

/// N x |U| matrix of engagement counts; columns follow Dataset::user_index.
Matrix build_engagement_matrix(const Dataset& ds);

/// A_news = E * E^T: shared-engagement weights between news items.
Matrix build_global_graph(const Matrix& engagement);

/// d_i = sum_{j != i} a_ij. Throws ValidationError if a is not square or is
/// asymmetric beyond 1e-9.
std::vector<double> node_degrees(const Matrix& a);

/// Learnable per-news embedding: row i of the encoding is w[i] + b, which is
/// W times a one-hot indicator plus b.
struct PositionalEncoder {
  PositionalEncoder() = default;
  PositionalEncoder(std::size_t n_news, std::size_t dim, Rng& rng,
                    const std::string& prefix = "pt.pe");

  Param w;  // n_news x dim
  Param b;  // 1 x dim

  std::size_t size() const noexcept { return w.value.rows(); }
  ParamList params() { return {&w, &b}; }
};

Matrix positional_encoding(const PositionalEncoder& pe, std::span<const std::size_t> indices);
/// Accumulates into the touched rows of w and into b.
void positional_encoding_backward(PositionalEncoder& pe, std::span<const std::size_t> indices,
                                  const Matrix& grad);

/// MLP(3 -> hidden -> 2) scoring a news-news edge from
/// [ln(1 + a_ij), ln(1 + d_i), ln(1 + d_j)]. Class 0 is "keep".
struct EdgeRefiner {
  EdgeRefiner() = default;
  EdgeRefiner(std::size_t hidden, Rng& rng, const std::string& prefix = "pt.refiner");

  Param w1;  // 3 x hidden
  Param b1;  // 1 x hidden
  Param w2;  // hidden x 2
  Param b2;  // 1 x 2

  ParamList params() { return {&w1, &b1, &w2, &b2}; }
};

/// Constant refiner inputs for every ordered off-diagonal pair with a_ij != 0.
struct RetentionInputs {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  Matrix features;  // pairs x 3
};

RetentionInputs make_retention_inputs(const Matrix& a, std::span<const double> degrees);

struct RetentionTrace {
  Matrix pre_hidden;  // pairs x hidden
  Matrix hidden;
  Matrix probs;       // pairs x 2
  Matrix m;           // n x n, symmetric, zero diagonal
};

RetentionTrace edge_retention_forward(const RetentionInputs& in, const EdgeRefiner& refiner);
void edge_retention_backward(const RetentionInputs& in, const RetentionTrace& trace,
                             const Matrix& grad_m, EdgeRefiner& refiner);

/// Edge retention matrix M: keep-probabilities, averaged with the transpose,
/// zero where a_ij = 0 and on the diagonal.
Matrix edge_retention(const Matrix& a, std::span<const double> degrees,
                      const EdgeRefiner& refiner);

/// A o M + I (elementwise reweighting plus self-loops).
Matrix refine(const Matrix& a, const Matrix& m);

/// D^{-1/2} A D^{-1/2} with D = diag(row sums of a_hat).
Matrix gcn_normalize(const Matrix& a_hat);
/// Gradient w.r.t. a_hat given the gradient w.r.t. the normalised operator.
Matrix gcn_normalize_backward(const Matrix& a_hat, const Matrix& grad_norm);

/// Global news graph and its refinement under one edge refiner.
struct GlobalGraph {
  Matrix a_news;
  std::vector<double> degrees;
  Matrix m;
  Matrix a_refined;
  Matrix a_norm;
};

GlobalGraph make_global_graph(const Dataset& ds, const EdgeRefiner& refiner);

/// Plain CSV, one matrix row per line, %.17g.
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);

}  // namespace psstl
