#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lnn/dynamics.hpp"
#include "lnn/polynomial.hpp"
#include "lnn/translation.hpp"

namespace lnn {

enum class QueryKind { kPhi1, kPhi2 };

/// "phi1" (some x in D\{0} with vdot >= 0) or "phi2" (with V <= 0).
std::string to_string(QueryKind which);

enum class Relation { kLe, kLt, kGe, kGt };

std::string_view smt_operator(Relation rel);

/// lhs <rel> bound.
struct Atom {
  Polynomial lhs;
  Relation rel;
  Rational bound;
};

bool holds(const Atom& atom, std::span<const Rational> x);

/// Existential conjunction over the state variables, decided by check-sat.
struct FalsificationQuery {
  QueryKind which;
  DomainSpec domain;
  std::vector<std::string> variables;
  std::vector<Atom> body;
};

/// Domain atoms first (||x||^2 <= gamma^2, x_i >= 0, ||x||^2 >= rho^2), then
/// ||x||^2 > 0, then the violated condition (vdot >= 0 or V <= 0).
std::pair<FalsificationQuery, FalsificationQuery> build_queries(const CertificateCandidate& cand,
                                                               const DomainSpec& domain);

/// QF_NRA script with set-logic, one declare-const per variable, a single
/// assert of the conjunction, check-sat and get-model. Coefficients are exact
/// terms; output is byte-deterministic.
std::string emit_smtlib(const FalsificationQuery& query);

/// Exact SMT-LIB term for a rational: `3`, `(- 3)`, `(/ 1 10)`, `(/ (- 1) 10)`.
std::string smt_rational(const Rational& value);
/// Sum-of-products term for a polynomial; terms in descending graded-lex order.
std::string smt_polynomial(const Polynomial& p, const std::vector<std::string>& vars);

/// Minimal s-expression tree for reading solver output.
struct SExpr {
  std::string atom;  // empty for lists
  std::vector<SExpr> items;
  bool is_atom() const { return items.empty() && !atom.empty(); }
  bool is_list() const { return atom.empty(); }
};

/// Parses every top-level s-expression in `text`. Throws std::invalid_argument.
std::vector<SExpr> parse_sexprs(std::string_view text);

enum class SolverAnswer { kSat, kUnsat, kUnknown, kError };

struct ParsedSolverOutput {
  SolverAnswer answer = SolverAnswer::kError;
  /// Variable assignment for sat answers; unassigned variables default to 0.
  std::optional<std::vector<Rational>> model;
  /// True if some value was an algebraic number replaced by a nearby rational.
  bool approximate = false;
  std::string error;
};

/// Interprets `sat`/`unsat`/`unknown` and a get-model response. Model values
/// may be integers, decimals, fractions, negations or root-obj terms.
ParsedSolverOutput parse_solver_output(std::string_view text, const std::vector<std::string>& variables);

}  // namespace lnn
