// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include "psstl/matrix.hpp"
#include "psstl/rng.hpp"
#include "psstl/synth.hpp"

namespace psstl::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

// Central-difference gradient of a scalar function of one matrix.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, Matrix x,
                               double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + h;
    const double plus = f(x);
    x.data()[i] = orig - h;
    const double minus = f(x);
    x.data()[i] = orig;
    g.data()[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

inline double max_rel_err(const Matrix& analytic, const Matrix& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    const double n = numeric.data()[i];
    worst = std::max(worst, std::abs(a - n) / std::max(1e-8, std::abs(a) + std::abs(n)));
  }
  return worst;
}

inline SynthParams small_synth(std::size_t n_news = 30, std::uint64_t seed = 7) {
  SynthParams p;
  p.n_news = n_news;
  p.n_users = 60;
  p.q_in = 0.15;
  p.q_out = 0.02;
  p.tree_size_min = 2;
  p.tree_size_max = 6;
  p.feature_dim = 6;
  p.seed = seed;
  return p;
}

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("psstl-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace psstl::testing
