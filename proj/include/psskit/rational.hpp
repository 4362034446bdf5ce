#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace psskit {

using Rational = mpq_class;

/// Parses "3", "-0.75", "3/4" exactly. Returns nullopt on malformed text.
std::optional<Rational> parse_rational(std::string_view text);

/// Exact conversion of a double through its shortest round-trip decimal form,
/// so 0.1 becomes 1/10 rather than the binary expansion.
Rational rational_from_double(double value);

std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

/// Exact square root when both numerator and denominator are perfect squares.
std::optional<Rational> exact_sqrt(const Rational& q);

}  // namespace psskit
