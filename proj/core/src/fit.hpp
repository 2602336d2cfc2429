// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "psstl/adam.hpp"
#include "psstl/errors.hpp"
#include "psstl/param.hpp"
#include "psstl/training.hpp"

namespace psstl::detail {

struct ValidationScore {
  double loss = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct FitResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_macro_f1 = 0.0;
};

// Shared epoch loop. `train_step` runs forward + backward on the training
// rows and returns the loss; `validate` scores the current parameters.
// Parameters end at the best-validation checkpoint.
inline FitResult fit(const ParamList& params, const TrainOptions& options,
                     const std::function<double(std::size_t epoch)>& train_step,
                     const std::function<ValidationScore()>& validate) {
  FitResult result;
  if (options.max_epochs == 0) return result;
  Adam adam(AdamOptions{options.lr});
  std::vector<Matrix> best = snapshot_values(params);
  double best_f1 = -1.0;
  double best_loss = 0.0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    zero_grads(params);
    const double loss = train_step(epoch);
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
    }
    adam.step(params);
    const ValidationScore score = validate();
    result.history.push_back({epoch, loss, score.loss, score.accuracy, score.macro_f1});
    // Ties on macro-F1 are broken by validation loss.
    const bool improved =
        score.macro_f1 > best_f1 || (score.macro_f1 == best_f1 && score.loss < best_loss);
    if (improved) {
      best_f1 = score.macro_f1;
      best_loss = score.loss;
      best = snapshot_values(params);
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  restore_values(params, best);
  result.best_val_macro_f1 = best_f1;
  return result;
}

}  // namespace psstl::detail
