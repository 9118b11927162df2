#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace lnn {

/// Exact rational number. GMP keeps it in canonical form (den > 0, gcd 1).
using Rational = mpq_class;

/// The exact value of a finite binary double. Throws on NaN/inf.
Rational rational_from_double(double value);

/// Parses `123`, `-4`, `0.1`, `2.5e-3`, `7/3` into an exact rational.
/// Decimal points and exponents are interpreted in base ten, exactly.
Rational parse_rational(std::string_view text);

/// "num/den" or "num" when den == 1.
std::string to_string(const Rational& value);

/// Nearest double.
inline double to_double(const Rational& value) { return value.get_d(); }

}  // namespace lnn
