// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "psstl/dataset.hpp"

namespace psstl {

/// Six news items (3 true, 3 fake), three users, trees of at most four
/// nodes, feature_dim 4. Used for gradient checks and documentation; the
/// same content ships as data/fixture_6news.jsonl.
Dataset fixture_dataset();

}  // namespace psstl
