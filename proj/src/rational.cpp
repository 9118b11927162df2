#include "lnn/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace lnn {

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("cannot convert non-finite value to a rational");
  }
  // mpq_set_d is exact for finite doubles.
  Rational result(value);
  result.canonicalize();
  return result;
}

namespace {

mpz_class parse_digits(std::string_view digits) {
  mpz_class out;
  if (digits.empty()) return out;
  if (out.set_str(std::string(digits), 10) != 0) {
    throw std::invalid_argument("malformed number: " + std::string(digits));
  }
  return out;
}

mpz_class pow10(unsigned long exponent) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), 10, exponent);
  return out;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return num / den;
  }
  bool negative = false;
  std::size_t pos = 0;
  if (text[pos] == '-' || text[pos] == '+') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::size_t int_begin = pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  std::string_view int_part = text.substr(int_begin, pos - int_begin);
  std::string_view frac_part;
  if (pos < text.size() && text[pos] == '.') {
    std::size_t frac_begin = ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    frac_part = text.substr(frac_begin, pos - frac_begin);
  }
  if (int_part.empty() && frac_part.empty()) {
    throw std::invalid_argument("malformed number: " + std::string(text));
  }
  long exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    std::size_t exp_begin = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (exp_begin == pos || pos - exp_begin > 6) {
      throw std::invalid_argument("malformed exponent: " + std::string(text));
    }
    exponent = std::stol(std::string(text.substr(exp_begin, pos - exp_begin)));
    if (exp_negative) exponent = -exponent;
  }
  if (pos != text.size()) {
    throw std::invalid_argument("malformed number: " + std::string(text));
  }
  mpz_class mantissa = parse_digits(std::string(int_part) + std::string(frac_part));
  exponent -= static_cast<long>(frac_part.size());
  Rational result;
  if (exponent >= 0) {
    result = Rational(mantissa * pow10(static_cast<unsigned long>(exponent)));
  } else {
    result = Rational(mantissa, pow10(static_cast<unsigned long>(-exponent)));
    result.canonicalize();
  }
  return negative ? Rational(-result) : result;
}

std::string to_string(const Rational& value) { return value.get_str(10); }

}  // namespace lnn
