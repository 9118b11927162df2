#include "lnn/smtlib.hpp"

#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace lnn {

std::string to_string(QueryKind which) { return which == QueryKind::kPhi1 ? "phi1" : "phi2"; }

std::string_view smt_operator(Relation rel) {
  switch (rel) {
    case Relation::kLe: return "<=";
    case Relation::kLt: return "<";
    case Relation::kGe: return ">=";
    case Relation::kGt: return ">";
  }
  return "?";
}

bool holds(const Atom& atom, std::span<const Rational> x) {
  const Rational value = atom.lhs(x);
  switch (atom.rel) {
    case Relation::kLe: return value <= atom.bound;
    case Relation::kLt: return value < atom.bound;
    case Relation::kGe: return value >= atom.bound;
    case Relation::kGt: return value > atom.bound;
  }
  return false;
}

std::pair<FalsificationQuery, FalsificationQuery> build_queries(const CertificateCandidate& cand,
                                                               const DomainSpec& domain) {
  domain.validate();
  const std::size_t n = cand.dimension();
  if (cand.vdot.dimension() != n || cand.variable_names.size() != n) {
    throw std::invalid_argument("build_queries: candidate dimensions disagree");
  }
  Polynomial norm2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Polynomial xi = Polynomial::variable(n, i);
    norm2 += xi * xi;
  }
  std::vector<Atom> region;
  region.push_back({norm2, Relation::kLe, domain.gamma * domain.gamma});
  if (domain.orthant()) {
    for (std::size_t i = 0; i < n; ++i) region.push_back({Polynomial::variable(n, i), Relation::kGe, 0});
  }
  if (domain.kind == DomainKind::kOrthantAnnulus) {
    region.push_back({norm2, Relation::kGe, domain.rho * domain.rho});
  }
  region.push_back({norm2, Relation::kGt, 0});

  FalsificationQuery phi1{QueryKind::kPhi1, domain, cand.variable_names, region};
  phi1.body.push_back({cand.vdot, Relation::kGe, 0});
  FalsificationQuery phi2{QueryKind::kPhi2, domain, cand.variable_names, std::move(region)};
  phi2.body.push_back({cand.v, Relation::kLe, 0});
  return {std::move(phi1), std::move(phi2)};
}

namespace {

bool is_simple_symbol(const std::string& s) {
  static const char* kReserved[] = {"and", "or", "not", "let", "ite", "true", "false", "exists", "forall",
                                    "assert", "par", "_", "!", "as", "distinct", "xor", "root-obj"};
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (const char* r : kReserved) {
    if (s == r) return false;
  }
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string symbol(const std::string& name) { return is_simple_symbol(name) ? name : "|" + name + "|"; }

std::string strip_bars(const std::string& s) {
  if (s.size() >= 2 && s.front() == '|' && s.back() == '|') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::string smt_rational(const Rational& value) {
  const mpz_class& num = value.get_num();
  const mpz_class& den = value.get_den();
  const std::string mag = mpz_class(abs(num)).get_str();
  const std::string n = num < 0 ? "(- " + mag + ")" : mag;
  if (den == 1) return n;
  return "(/ " + n + " " + den.get_str() + ")";
}

std::string smt_polynomial(const Polynomial& p, const std::vector<std::string>& vars) {
  if (p.is_zero()) return "0";
  std::vector<std::string> terms;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    std::vector<std::string> factors;
    const Monomial& m = it->first;
    for (std::size_t i = 0; i < m.dimension(); ++i) {
      for (unsigned e = 0; e < m[i]; ++e) factors.push_back(symbol(vars[i]));
    }
    if (it->second != 1 || factors.empty()) factors.insert(factors.begin(), smt_rational(it->second));
    if (factors.size() == 1) {
      terms.push_back(factors.front());
    } else {
      std::string t = "(*";
      for (const auto& f : factors) t += " " + f;
      terms.push_back(t + ")");
    }
  }
  if (terms.size() == 1) return terms.front();
  std::string out = "(+";
  for (const auto& t : terms) out += " " + t;
  return out + ")";
}

std::string emit_smtlib(const FalsificationQuery& query) {
  std::ostringstream out;
  out << "; falsification query " << to_string(query.which) << " over " << query.domain.describe() << '\n';
  out << "(set-logic QF_NRA)\n";
  for (const auto& v : query.variables) out << "(declare-const " << symbol(v) << " Real)\n";
  out << "(assert (and";
  for (const auto& atom : query.body) {
    out << "\n  (" << smt_operator(atom.rel) << ' ' << smt_polynomial(atom.lhs, query.variables) << ' '
        << smt_rational(atom.bound) << ')';
  }
  out << "))\n(check-sat)\n(get-model)\n(exit)\n";
  return out.str();
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
  std::vector<SExpr> roots;
  std::vector<SExpr> stack;
  std::size_t i = 0;
  auto push_atom = [&](std::string atom) {
    SExpr e;
    e.atom = std::move(atom);
    if (stack.empty()) {
      roots.push_back(std::move(e));
    } else {
      stack.back().items.push_back(std::move(e));
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      stack.emplace_back();
      ++i;
    } else if (c == ')') {
      if (stack.empty()) throw std::invalid_argument("unbalanced ')' in solver output");
      SExpr done = std::move(stack.back());
      stack.pop_back();
      if (stack.empty()) {
        roots.push_back(std::move(done));
      } else {
        stack.back().items.push_back(std::move(done));
      }
      ++i;
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') ++j;
      push_atom(std::string(text.substr(i, j + 1 - i)));
      i = j + 1;
    } else if (c == '|') {
      std::size_t j = text.find('|', i + 1);
      if (j == std::string_view::npos) throw std::invalid_argument("unterminated |symbol| in solver output");
      push_atom(std::string(text.substr(i, j + 1 - i)));
      i = j + 1;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
             text[j] != ')') {
        ++j;
      }
      push_atom(std::string(text.substr(i, j - i)));
      i = j;
    }
  }
  if (!stack.empty()) throw std::invalid_argument("unbalanced '(' in solver output");
  return roots;
}

namespace {

using Univariate = std::vector<Rational>;  // coefficient of x^k at index k

Univariate uni_add(Univariate a, const Univariate& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t k = 0; k < b.size(); ++k) a[k] += b[k];
  return a;
}

Univariate uni_mul(const Univariate& a, const Univariate& b) {
  Univariate out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Univariate univariate(const SExpr& e) {
  if (e.is_atom()) {
    if (std::isdigit(static_cast<unsigned char>(e.atom[0]))) return {parse_rational(e.atom)};
    return {0, 1};
  }
  if (e.items.empty() || !e.items[0].is_atom()) throw std::invalid_argument("malformed root-obj polynomial");
  const std::string& op = e.items[0].atom;
  if (op == "+") {
    Univariate acc{0};
    for (std::size_t i = 1; i < e.items.size(); ++i) acc = uni_add(acc, univariate(e.items[i]));
    return acc;
  }
  if (op == "*") {
    Univariate acc{1};
    for (std::size_t i = 1; i < e.items.size(); ++i) acc = uni_mul(acc, univariate(e.items[i]));
    return acc;
  }
  if (op == "-") {
    Univariate first = univariate(e.items.at(1));
    if (e.items.size() == 2) {
      for (auto& c : first) c = -c;
      return first;
    }
    for (std::size_t i = 2; i < e.items.size(); ++i) {
      Univariate rhs = univariate(e.items[i]);
      for (auto& c : rhs) c = -c;
      first = uni_add(first, rhs);
    }
    return first;
  }
  if (op == "^") {
    const Univariate base = univariate(e.items.at(1));
    const unsigned long k = std::stoul(e.items.at(2).atom);
    Univariate acc{1};
    for (unsigned long i = 0; i < k; ++i) acc = uni_mul(acc, base);
    return acc;
  }
  throw std::invalid_argument("unsupported operator '" + op + "' in root-obj");
}

// k-th (1-based, ascending) real root of an algebraic number description.
Rational approximate_root(const SExpr& poly_expr, std::size_t index) {
  Univariate coeffs = univariate(poly_expr);
  while (coeffs.size() > 1 && coeffs.back() == 0) coeffs.pop_back();
  if (coeffs.size() < 2) throw std::invalid_argument("root-obj of a constant polynomial");
  Eigen::VectorXd c(static_cast<Eigen::Index>(coeffs.size()));
  for (std::size_t k = 0; k < coeffs.size(); ++k) c[static_cast<Eigen::Index>(k)] = coeffs[k].get_d();
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(c);
  std::vector<double> roots;
  solver.realRoots(roots, 1e-8);
  std::sort(roots.begin(), roots.end());
  if (index == 0 || index > roots.size()) throw std::invalid_argument("root-obj index out of range");
  double r = roots[index - 1];
  // A few Newton steps in double to polish the companion-matrix estimate.
  for (int it = 0; it < 8; ++it) {
    double p = 0, dp = 0;
    for (std::size_t k = coeffs.size(); k-- > 0;) {
      dp = dp * r + p;
      p = p * r + c[static_cast<Eigen::Index>(k)];
    }
    if (dp == 0) break;
    r -= p / dp;
  }
  return rational_from_double(r);
}

Rational model_value(const SExpr& e, bool& approximate) {
  if (e.is_atom()) return parse_rational(e.atom);
  if (e.items.empty() || !e.items[0].is_atom()) throw std::invalid_argument("malformed model value");
  const std::string& op = e.items[0].atom;
  if (op == "-") {
    Rational first = model_value(e.items.at(1), approximate);
    if (e.items.size() == 2) return -first;
    for (std::size_t i = 2; i < e.items.size(); ++i) first -= model_value(e.items[i], approximate);
    return first;
  }
  if (op == "+" || op == "*") {
    Rational acc = op == "+" ? 0 : 1;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      if (op == "+") {
        acc += model_value(e.items[i], approximate);
      } else {
        acc *= model_value(e.items[i], approximate);
      }
    }
    return acc;
  }
  if (op == "/") {
    const Rational den = model_value(e.items.at(2), approximate);
    if (den == 0) throw std::invalid_argument("division by zero in model value");
    return model_value(e.items.at(1), approximate) / den;
  }
  if (op == "root-obj") {
    approximate = true;
    return approximate_root(e.items.at(1), std::stoul(e.items.at(2).atom));
  }
  throw std::invalid_argument("unsupported model value operator '" + op + "'");
}

void collect_definitions(const SExpr& e, std::vector<const SExpr*>& out) {
  if (!e.is_list()) return;
  if (!e.items.empty() && e.items[0].is_atom() && e.items[0].atom == "define-fun") {
    out.push_back(&e);
    return;
  }
  for (const auto& child : e.items) collect_definitions(child, out);
}

}  // namespace

ParsedSolverOutput parse_solver_output(std::string_view text, const std::vector<std::string>& variables) {
  ParsedSolverOutput out;
  std::vector<SExpr> roots;
  try {
    roots = parse_sexprs(text);
  } catch (const std::invalid_argument& e) {
    out.error = e.what();
    return out;
  }
  if (roots.empty() || !roots[0].is_atom()) {
    out.error = "solver produced no answer";
    return out;
  }
  const std::string& answer = roots[0].atom;
  if (answer == "unsat") {
    out.answer = SolverAnswer::kUnsat;
    return out;
  }
  if (answer == "unknown") {
    out.answer = SolverAnswer::kUnknown;
    return out;
  }
  if (answer != "sat") {
    out.error = "unexpected solver answer '" + answer + "'";
    return out;
  }
  std::vector<const SExpr*> defs;
  for (std::size_t i = 1; i < roots.size(); ++i) collect_definitions(roots[i], defs);
  if (defs.empty()) {
    out.error = "sat answer without a model";
    return out;
  }
  std::vector<Rational> point(variables.size(), 0);
  try {
    for (const SExpr* def : defs) {
      // (define-fun name () Real value)
      if (def->items.size() != 5 || !def->items[1].is_atom()) throw std::invalid_argument("malformed define-fun");
      const std::string name = strip_bars(def->items[1].atom);
      auto it = std::find(variables.begin(), variables.end(), name);
      if (it == variables.end()) continue;
      point[static_cast<std::size_t>(it - variables.begin())] = model_value(def->items[4], out.approximate);
    }
  } catch (const std::exception& e) {
    out.error = std::string("cannot read model: ") + e.what();
    return out;
  }
  out.answer = SolverAnswer::kSat;
  out.model = std::move(point);
  return out;
}

}  // namespace lnn
