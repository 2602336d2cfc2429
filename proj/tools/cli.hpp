// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psstl::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,       // bad flags, bad config values
  kIo = 3,          // unreadable or unwritable files
  kValidation = 4,  // malformed or invalid data, checkpoint mismatch
  kNumeric = 5,     // divergence, failed gradient check
};

/// Runs one pss-tl command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace psstl::cli
