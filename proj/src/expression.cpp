#include <cctype>
#include <sstream>
#include <string_view>

#include "lnn/errors.hpp"
#include "lnn/polynomial.hpp"

namespace lnn {

namespace {

enum class TokenKind { kNumber, kIdent, kPlus, kMinus, kStar, kSlash, kCaret, kLParen, kRParen, kEnd };

struct Token {
  TokenKind kind;
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) {
        out.push_back({TokenKind::kEnd, {}, line_, column_});
        return out;
      }
      const std::size_t start = pos_;
      const std::size_t line = line_, column = column_;
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        scan_number();
        out.push_back({TokenKind::kNumber, text_.substr(start, pos_ - start), line, column});
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          advance();
        }
        out.push_back({TokenKind::kIdent, text_.substr(start, pos_ - start), line, column});
      } else {
        TokenKind kind;
        switch (c) {
          case '+': kind = TokenKind::kPlus; break;
          case '-': kind = TokenKind::kMinus; break;
          case '*': kind = TokenKind::kStar; break;
          case '/': kind = TokenKind::kSlash; break;
          case '^': kind = TokenKind::kCaret; break;
          case '(': kind = TokenKind::kLParen; break;
          case ')': kind = TokenKind::kRParen; break;
          default:
            throw ParseError(std::string("unexpected character '") + c + "'", line, column);
        }
        advance();
        out.push_back({kind, text_.substr(start, 1), line, column});
      }
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  void scan_number() {
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      advance();
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        while (pos_ < look) advance();
        digits();
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const std::vector<std::string>& vars)
      : tokens_(std::move(tokens)), vars_(vars), dim_(vars.size()) {}

  Polynomial parse() {
    Polynomial result = expression();
    const Token& t = peek();
    if (t.kind != TokenKind::kEnd) {
      if (t.kind == TokenKind::kIdent || t.kind == TokenKind::kNumber || t.kind == TokenKind::kLParen) {
        throw error("implicit multiplication is not allowed; write '*'", t);
      }
      throw error("unexpected '" + std::string(t.text) + "'", t);
    }
    return result;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool accept(TokenKind kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }
  static ParseError error(const std::string& message, const Token& t) {
    return ParseError(message, t.line, t.column);
  }

  Polynomial expression() {
    Polynomial acc = term();
    while (true) {
      if (accept(TokenKind::kPlus)) {
        acc += term();
      } else if (accept(TokenKind::kMinus)) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    while (true) {
      if (accept(TokenKind::kStar)) {
        acc = acc * unary();
      } else if (peek().kind == TokenKind::kSlash) {
        const Token& slash = next();
        Polynomial divisor = unary();
        if (divisor.degree() != 0 || divisor.is_zero()) {
          throw error("division is only allowed by a nonzero numeric constant", slash);
        }
        acc *= Rational(1 / divisor.constant_term());
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    if (accept(TokenKind::kMinus)) return -unary();
    if (accept(TokenKind::kPlus)) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (peek().kind != TokenKind::kCaret) return base;
    const Token& caret = next();
    const Token& exp = peek();
    if (exp.kind == TokenKind::kMinus) throw error("negative exponent", exp);
    if (exp.kind != TokenKind::kNumber) throw error("exponent must be a non-negative integer literal", caret);
    for (char c : exp.text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw error("non-integer exponent", exp);
    }
    if (exp.text.size() > 4) throw error("exponent too large", exp);
    next();
    const unsigned e = static_cast<unsigned>(std::stoul(std::string(exp.text)));
    if (peek().kind == TokenKind::kCaret) throw error("chained '^' is ambiguous; use parentheses", peek());
    return pow(base, e);
  }

  Polynomial primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kNumber: {
        next();
        Rational value;
        try {
          value = parse_rational(t.text);
        } catch (const std::invalid_argument&) {
          throw error("malformed number '" + std::string(t.text) + "'", t);
        }
        return Polynomial::constant(dim_, value);
      }
      case TokenKind::kIdent: {
        next();
        for (std::size_t i = 0; i < vars_.size(); ++i) {
          if (vars_[i] == t.text) return Polynomial::variable(dim_, i);
        }
        throw error("unknown identifier '" + std::string(t.text) + "'", t);
      }
      case TokenKind::kLParen: {
        next();
        Polynomial inner = expression();
        if (!accept(TokenKind::kRParen)) throw error("expected ')'", peek());
        return inner;
      }
      case TokenKind::kEnd:
        throw error("unexpected end of expression", t);
      default:
        throw error("unexpected '" + std::string(t.text) + "'", t);
    }
  }

  std::vector<Token> tokens_;
  const std::vector<std::string>& vars_;
  std::size_t dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, const std::vector<std::string>& vars) {
  if (vars.empty()) throw std::invalid_argument("parse_polynomial: no variables declared");
  return Parser(Lexer(text).tokenize(), vars).parse();
}

std::string to_string(const Polynomial& p, const std::vector<std::string>& vars) {
  if (vars.size() != p.dimension()) throw std::invalid_argument("to_string: variable count mismatch");
  if (p.is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const Monomial& m = it->first;
    Rational c = it->second;
    const bool negative = c < 0;
    if (negative) c = -c;
    if (first) {
      if (negative) out << '-';
    } else {
      out << (negative ? " - " : " + ");
    }
    first = false;
    std::ostringstream factors;
    bool first_factor = true;
    for (std::size_t i = 0; i < m.dimension(); ++i) {
      if (m[i] == 0) continue;
      if (!first_factor) factors << '*';
      first_factor = false;
      factors << vars[i];
      if (m[i] > 1) factors << '^' << m[i];
    }
    if (m.degree() == 0) {
      out << to_string(c);
    } else if (c == 1) {
      out << factors.str();
    } else {
      out << to_string(c) << '*' << factors.str();
    }
  }
  return out.str();
}

std::vector<std::string> default_variable_names(std::size_t dimension) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dimension; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

}  // namespace lnn
