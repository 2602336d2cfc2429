// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace psstl {

/// %.17g: enough digits for an exact double round-trip.
std::string format_exact(double value);
/// %.17g without the finiteness check (prints inf/nan); for diagnostics.
std::string format_diagnostic(double value);
/// Fixed-point with the given number of decimals.
std::string format_fixed(double value, int decimals);
/// 16 lowercase hex digits.
std::string format_hex64(std::uint64_t value);
/// JSON string literal with escaping.
std::string json_quote(const std::string& s);

}  // namespace psstl
