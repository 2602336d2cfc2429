// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "psstl/config.hpp"
#include "psstl/dataset.hpp"
#include "psstl/grad_check.hpp"

namespace psstl {

struct ModelGradCheck {
  std::string model;  // "content", "propagation" or "student"
  GradCheckReport report;
};

/// Finite-difference checks of every trainable parameter on `ds`, using all
/// rows as the training mask. Teachers are checked under their own
/// cross-entropy; the student under the full distillation loss, with freshly
/// initialized teachers supplying the (constant) targets.
std::vector<ModelGradCheck> run_model_grad_checks(const Dataset& ds, const RunConfig& cfg,
                                                  double h = 1e-5);

}  // namespace psstl
