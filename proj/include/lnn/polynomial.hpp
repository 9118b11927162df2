#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lnn/rational.hpp"

namespace lnn {

/// Exponent vector over an ambient dimension n. Ordered graded-lex: lower total
/// degree first, ties broken lexicographically on exponents (x1 before x2).
class Monomial {
 public:
  explicit Monomial(std::size_t dimension = 0) : exponents_(dimension, 0) {}
  explicit Monomial(std::vector<unsigned> exponents) : exponents_(std::move(exponents)) {}

  static Monomial variable(std::size_t dimension, std::size_t index, unsigned power = 1) {
    Monomial m(dimension);
    m.exponents_.at(index) = power;
    return m;
  }

  std::size_t dimension() const { return exponents_.size(); }
  unsigned operator[](std::size_t i) const { return exponents_[i]; }
  const std::vector<unsigned>& exponents() const { return exponents_; }

  unsigned degree() const {
    return std::accumulate(exponents_.begin(), exponents_.end(), 0u);
  }

  Monomial operator*(const Monomial& other) const {
    Monomial out(*this);
    for (std::size_t i = 0; i < exponents_.size(); ++i) out.exponents_[i] += other.exponents_[i];
    return out;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
    if (auto c = a.degree() <=> b.degree(); c != 0) return c;
    // Larger leading exponent sorts later, so x^2 > x*y > y^2.
    return a.exponents_ <=> b.exponents_;
  }

 private:
  std::vector<unsigned> exponents_;
};

namespace detail {

template <typename To, typename From>
To coeff_cast(const From& value) {
  if constexpr (std::is_same_v<To, From>) {
    return value;
  } else if constexpr (std::is_same_v<From, Rational> && std::is_same_v<To, double>) {
    return value.get_d();
  } else {
    return To(value);
  }
}

}  // namespace detail

/// Sparse multivariate polynomial. Terms with zero coefficient are never
/// stored, so structural equality is polynomial equality.
template <typename Coeff>
class BasicPolynomial {
 public:
  using Scalar = Coeff;
  using TermMap = std::map<Monomial, Coeff>;

  explicit BasicPolynomial(std::size_t dimension = 1) : dimension_(dimension) {
    if (dimension == 0) throw std::invalid_argument("polynomial dimension must be positive");
  }

  static BasicPolynomial constant(std::size_t dimension, const Coeff& value) {
    BasicPolynomial p(dimension);
    p.add_term(Monomial(dimension), value);
    return p;
  }

  static BasicPolynomial variable(std::size_t dimension, std::size_t index) {
    if (index >= dimension) throw std::out_of_range("variable index out of range");
    BasicPolynomial p(dimension);
    p.add_term(Monomial::variable(dimension, index), Coeff(1));
    return p;
  }

  std::size_t dimension() const { return dimension_; }
  const TermMap& terms() const { return terms_; }
  std::size_t num_terms() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  /// Total degree; 0 for the zero polynomial.
  unsigned degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }
  /// Lowest total degree present; 0 for the zero polynomial.
  unsigned min_degree() const { return terms_.empty() ? 0 : terms_.begin()->first.degree(); }

  Coeff coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Coeff(0) : it->second;
  }
  Coeff constant_term() const { return coefficient(Monomial(dimension_)); }

  void add_term(const Monomial& m, const Coeff& c) {
    if (m.dimension() != dimension_) throw std::invalid_argument("monomial dimension mismatch");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  BasicPolynomial& operator+=(const BasicPolynomial& other) {
    check_dimension(other);
    for (const auto& [m, c] : other.terms_) add_term(m, c);
    return *this;
  }
  BasicPolynomial& operator-=(const BasicPolynomial& other) {
    check_dimension(other);
    for (const auto& [m, c] : other.terms_) add_term(m, Coeff(-c));
    return *this;
  }
  BasicPolynomial& operator*=(const Coeff& s) {
    if (s == 0) {
      terms_.clear();
    } else {
      for (auto& term : terms_) term.second *= s;
    }
    return *this;
  }

  friend BasicPolynomial operator+(BasicPolynomial a, const BasicPolynomial& b) { return a += b; }
  friend BasicPolynomial operator-(BasicPolynomial a, const BasicPolynomial& b) { return a -= b; }
  friend BasicPolynomial operator*(BasicPolynomial a, const Coeff& s) { return a *= s; }
  friend BasicPolynomial operator*(const Coeff& s, BasicPolynomial a) { return a *= s; }
  friend BasicPolynomial operator-(BasicPolynomial a) {
    for (auto& term : a.terms_) term.second = -term.second;
    return a;
  }

  friend BasicPolynomial operator*(const BasicPolynomial& a, const BasicPolynomial& b) {
    a.check_dimension(b);
    BasicPolynomial out(a.dimension_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, Coeff(ca * cb));
    }
    return out;
  }

  friend bool operator==(const BasicPolynomial& a, const BasicPolynomial& b) {
    return a.dimension_ == b.dimension_ && a.terms_ == b.terms_;
  }

  /// Evaluates at `x` (anything indexable with size()) in the point's scalar
  /// type: exact for Rational points, round-to-nearest for doubles.
  template <typename Vec>
  auto operator()(const Vec& x) const {
    using T = std::decay_t<decltype(x[0])>;
    return evaluate_as<T>(x);
  }

  template <typename T, typename Vec>
  T evaluate_as(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != dimension_) {
      throw std::invalid_argument("evaluation point has dimension " + std::to_string(x.size()) +
                                  ", polynomial has " + std::to_string(dimension_));
    }
    std::vector<unsigned> max_exp(dimension_, 0);
    for (const auto& term : terms_) {
      for (std::size_t i = 0; i < dimension_; ++i) max_exp[i] = std::max(max_exp[i], term.first[i]);
    }
    std::vector<std::vector<T>> powers(dimension_);
    for (std::size_t i = 0; i < dimension_; ++i) {
      powers[i].reserve(max_exp[i] + 1);
      powers[i].push_back(T(1));
      for (unsigned e = 1; e <= max_exp[i]; ++e) powers[i].push_back(T(powers[i].back() * T(x[i])));
    }
    T sum(0);
    for (const auto& [m, c] : terms_) {
      T term = detail::coeff_cast<T>(c);
      for (std::size_t i = 0; i < dimension_; ++i) {
        if (m[i] != 0) term *= powers[i][m[i]];
      }
      sum += term;
    }
    return sum;
  }

  template <typename NewCoeff>
  BasicPolynomial<NewCoeff> cast() const {
    BasicPolynomial<NewCoeff> out(dimension_);
    for (const auto& [m, c] : terms_) out.add_term(m, detail::coeff_cast<NewCoeff>(c));
    return out;
  }

 private:
  void check_dimension(const BasicPolynomial& other) const {
    if (other.dimension_ != dimension_) {
      throw std::invalid_argument("polynomial dimension mismatch");
    }
  }

  std::size_t dimension_;
  TermMap terms_;
};

using Polynomial = BasicPolynomial<Rational>;
using PolynomialXd = BasicPolynomial<double>;

/// Exact partial derivative with respect to variable `index`.
template <typename Coeff>
BasicPolynomial<Coeff> partial(const BasicPolynomial<Coeff>& p, std::size_t index) {
  if (index >= p.dimension()) throw std::out_of_range("partial: variable index out of range");
  BasicPolynomial<Coeff> out(p.dimension());
  for (const auto& [m, c] : p.terms()) {
    if (m[index] == 0) continue;
    std::vector<unsigned> e = m.exponents();
    Coeff factor(e[index]);
    e[index] -= 1;
    out.add_term(Monomial(std::move(e)), Coeff(c * factor));
  }
  return out;
}

template <typename Coeff>
BasicPolynomial<Coeff> pow(const BasicPolynomial<Coeff>& base, unsigned exponent) {
  BasicPolynomial<Coeff> result = BasicPolynomial<Coeff>::constant(base.dimension(), Coeff(1));
  BasicPolynomial<Coeff> square = base;
  while (exponent > 0) {
    if (exponent & 1u) result = result * square;
    exponent >>= 1u;
    if (exponent > 0) square = square * square;
  }
  return result;
}

/// Parses an infix expression over `vars` (`+ - * ^`, unary minus,
/// parentheses, decimal literals; `/` only by a numeric literal).
/// Throws ParseError.
Polynomial parse_polynomial(std::string_view text, const std::vector<std::string>& vars);

/// Canonical text form, highest graded-lex term first, e.g. `-2*x^2 + 1/3*x*y`.
/// Re-parses to the same polynomial.
std::string to_string(const Polynomial& p, const std::vector<std::string>& vars);

/// Default variable names x1..xn.
std::vector<std::string> default_variable_names(std::size_t dimension);

}  // namespace lnn
