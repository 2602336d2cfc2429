// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace psstl {

/// Full-batch Adam with early stopping on validation macro-F1.
struct TrainOptions {
  double lr = 5e-4;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
};

}  // namespace psstl
