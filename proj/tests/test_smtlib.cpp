#include <gtest/gtest.h>

#include <cctype>
#include <map>

#include "lnn/smtlib.hpp"
#include "lnn/translation.hpp"
#include "support.hpp"

namespace lnn {
namespace {

using test::poly;

// Independent reader for the emitted subset of SMT-LIB: numerals, decimals,
// declared symbols, + - * / and the four comparisons.
class MiniReader {
 public:
  MiniReader(std::string text, std::vector<std::string> vars) : text_(std::move(text)), vars_(std::move(vars)) {}

  struct Constraint {
    std::string op;
    Polynomial difference;  // lhs - rhs
  };

  std::vector<Constraint> asserted() {
    std::vector<Constraint> out;
    std::size_t at = text_.find("(assert");
    if (at == std::string::npos) return out;
    pos_ = at + 7;
    skip();
    expect('(');
    if (token() != "and") throw std::runtime_error("expected and");
    while (true) {
      skip();
      if (text_[pos_] == ')') break;
      expect('(');
      Constraint c;
      c.op = token();
      const Polynomial lhs = term();
      const Polynomial rhs = term();
      expect(')');
      c.difference = lhs - rhs;
      out.push_back(c);
    }
    return out;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (text_[pos_] != c) throw std::runtime_error(std::string("expected ") + c + " at " + std::to_string(pos_));
    ++pos_;
  }
  std::string token() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')')
      ++pos_;
    return text_.substr(start, pos_ - start);
  }
  Polynomial term() {
    skip();
    const std::size_t n = vars_.size();
    if (text_[pos_] != '(') {
      const std::string t = token();
      for (std::size_t i = 0; i < n; ++i) {
        if (vars_[i] == t) return Polynomial::variable(n, i);
      }
      return Polynomial::constant(n, parse_rational(t));
    }
    expect('(');
    const std::string op = token();
    std::vector<Polynomial> args;
    while (true) {
      skip();
      if (text_[pos_] == ')') break;
      args.push_back(term());
    }
    expect(')');
    Polynomial r = args.at(0);
    if (op == "-" && args.size() == 1) return -r;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (op == "+") r += args[i];
      else if (op == "-") r -= args[i];
      else if (op == "*") r = r * args[i];
      else if (op == "/") r *= Rational(1) / args[i].constant_term();
      else throw std::runtime_error("unknown operator " + op);
    }
    return r;
  }

  std::string text_;
  std::vector<std::string> vars_;
  std::size_t pos_ = 0;
};

CertificateCandidate walkthrough_candidate() { return make_candidate(poly("x^2 + y^2"), test::parrilo()); }

TEST(BuildQueries, WalkthroughBodies) {
  const auto [phi1, phi2] = build_queries(walkthrough_candidate(), DomainSpec::ball(100));
  ASSERT_EQ(phi1.body.size(), 3u);
  EXPECT_EQ(phi1.body[0].lhs, poly("x^2 + y^2"));
  EXPECT_EQ(phi1.body[0].rel, Relation::kLe);
  EXPECT_EQ(phi1.body[0].bound, 10000);
  EXPECT_EQ(phi1.body[1].rel, Relation::kGt);
  EXPECT_EQ(phi1.body[1].bound, 0);
  EXPECT_EQ(phi1.body[2].lhs, poly("-2*x^2 + 2*x^2*y - 2*y^2"));
  EXPECT_EQ(phi1.body[2].rel, Relation::kGe);
  ASSERT_EQ(phi2.body.size(), 3u);
  EXPECT_EQ(phi2.body[2].lhs, poly("x^2 + y^2"));
  EXPECT_EQ(phi2.body[2].rel, Relation::kLe);
  EXPECT_EQ(phi1.which, QueryKind::kPhi1);
  EXPECT_EQ(phi2.which, QueryKind::kPhi2);
}

TEST(BuildQueries, AnnulusAddsOrthantAndInnerSphere) {
  const auto [phi1, phi2] = build_queries(walkthrough_candidate(), DomainSpec::orthant_annulus(Rational(1, 10), 1));
  ASSERT_EQ(phi1.body.size(), 6u);
  EXPECT_EQ(phi1.body[1].lhs, poly("x"));
  EXPECT_EQ(phi1.body[1].rel, Relation::kGe);
  EXPECT_EQ(phi1.body[2].lhs, poly("y"));
  EXPECT_EQ(phi1.body[3].lhs, poly("x^2 + y^2"));
  EXPECT_EQ(phi1.body[3].rel, Relation::kGe);
  EXPECT_EQ(phi1.body[3].bound, Rational(1, 100));
}

TEST(BuildQueries, AtomsDecideMembership) {
  const auto [phi1, phi2] = build_queries(walkthrough_candidate(), DomainSpec::ball(100));
  const auto witness = test::point({10, 2});
  for (const auto& a : phi1.body) EXPECT_TRUE(holds(a, witness));
  EXPECT_FALSE(holds(phi2.body[2], witness));
}

TEST(Emit, ScriptShape) {
  const auto [phi1, phi2] = build_queries(walkthrough_candidate(), DomainSpec::ball(100));
  const std::string s = emit_smtlib(phi2);
  EXPECT_NE(s.find("(set-logic QF_NRA)"), std::string::npos);
  EXPECT_NE(s.find("(declare-const x Real)"), std::string::npos);
  EXPECT_NE(s.find("(declare-const y Real)"), std::string::npos);
  EXPECT_NE(s.find("(check-sat)"), std::string::npos);
  EXPECT_NE(s.find("(get-model)"), std::string::npos);
  EXPECT_LT(s.find("(assert"), s.find("(check-sat)"));
  EXPECT_EQ(emit_smtlib(phi2), s);
}

TEST(Emit, RationalsAreExactTerms) {
  EXPECT_EQ(smt_rational(Rational(1, 10)), "(/ 1 10)");
  EXPECT_EQ(smt_rational(Rational(-3, 7)), "(/ (- 3) 7)");
  EXPECT_EQ(smt_rational(Rational(-4)), "(- 4)");
  EXPECT_EQ(smt_rational(Rational(12)), "12");
  const CertificateCandidate cand = make_candidate(poly("0.1*x^2 + y^2"), test::parrilo());
  const std::string s = emit_smtlib(build_queries(cand, DomainSpec::ball(1)).second);
  EXPECT_NE(s.find("(/ 1 10)"), std::string::npos);
  EXPECT_EQ(s.find("0.1"), std::string::npos);
}

TEST(Emit, ReservedNamesAreQuoted) {
  const VectorField f({"and", "x"}, {parse_polynomial("-and", {"and", "x"}), parse_polynomial("-x", {"and", "x"})});
  const CertificateCandidate cand = make_candidate(parse_polynomial("and^2 + x^2", {"and", "x"}), f);
  const std::string s = emit_smtlib(build_queries(cand, DomainSpec::ball(1)).first);
  EXPECT_NE(s.find("(declare-const |and| Real)"), std::string::npos);
}

TEST(EmitProperty, IndependentReaderRecoversConstraints) {
  std::mt19937_64 rng(61);
  const std::vector<DomainSpec> domains = {DomainSpec::ball(Rational(7, 2)), DomainSpec::orthant_ball(100),
                                           DomainSpec::orthant_annulus(Rational(1, 3), 5)};
  const VectorField f = benchmark("easy3d").field;
  for (int trial = 0; trial < 60; ++trial) {
    Polynomial v = test::random_polynomial(rng, 3, 4, 6);
    v -= Polynomial::constant(3, v.constant_term());
    const CertificateCandidate cand = make_candidate(v, f);
    for (const auto& d : domains) {
      const auto queries = build_queries(cand, d);
      for (const auto* q : {&queries.first, &queries.second}) {
        MiniReader reader(emit_smtlib(*q), q->variables);
        const auto constraints = reader.asserted();
        ASSERT_EQ(constraints.size(), q->body.size());
        for (std::size_t i = 0; i < constraints.size(); ++i) {
          EXPECT_EQ(constraints[i].op, smt_operator(q->body[i].rel));
          EXPECT_EQ(constraints[i].difference, q->body[i].lhs - Polynomial::constant(3, q->body[i].bound));
        }
      }
    }
  }
}

TEST(SolverOutput, SatModelForms) {
  const auto out = parse_solver_output(
      "sat\n(\n  (define-fun y () Real\n    (/ 3 2))\n  (define-fun x () Real\n    (- 2.5))\n)\n", test::kXY);
  ASSERT_EQ(out.answer, SolverAnswer::kSat);
  ASSERT_TRUE(out.model);
  EXPECT_EQ((*out.model)[0], Rational(-5, 2));
  EXPECT_EQ((*out.model)[1], Rational(3, 2));
  EXPECT_FALSE(out.approximate);

  const auto wrapped = parse_solver_output("sat\n(model (define-fun x () Real 10.0) (define-fun y () Real (- (/ 1 4))))",
                                           test::kXY);
  ASSERT_TRUE(wrapped.model);
  EXPECT_EQ((*wrapped.model)[0], 10);
  EXPECT_EQ((*wrapped.model)[1], Rational(-1, 4));
}

TEST(SolverOutput, UnassignedVariableDefaultsToZero) {
  const auto out = parse_solver_output("sat\n((define-fun x () Real 4))", test::kXY);
  ASSERT_TRUE(out.model);
  EXPECT_EQ((*out.model)[1], 0);
}

TEST(SolverOutput, AlgebraicWitnessIsApproximated) {
  const auto out =
      parse_solver_output("sat\n((define-fun x () Real (root-obj (+ (^ x 2) (- 2)) 2)) (define-fun y () Real 1))",
                          test::kXY);
  ASSERT_EQ(out.answer, SolverAnswer::kSat);
  ASSERT_TRUE(out.model);
  EXPECT_TRUE(out.approximate);
  EXPECT_NEAR(to_double((*out.model)[0]), std::sqrt(2.0), 1e-12);
}

TEST(SolverOutput, Answers) {
  EXPECT_EQ(parse_solver_output("unsat\n(error \"model is not available\")\n", test::kXY).answer, SolverAnswer::kUnsat);
  EXPECT_EQ(parse_solver_output("unknown\n", test::kXY).answer, SolverAnswer::kUnknown);
  EXPECT_EQ(parse_solver_output("", test::kXY).answer, SolverAnswer::kError);
  EXPECT_EQ(parse_solver_output("segfault", test::kXY).answer, SolverAnswer::kError);
  EXPECT_EQ(parse_solver_output("sat\n((define-fun x () Real (foo 1)))", test::kXY).answer, SolverAnswer::kError);
}

TEST(SExpr, Parses) {
  const auto items = parse_sexprs("(a (b |c d|) 1.5) ; comment\n x");
  ASSERT_EQ(items.size(), 2u);
  ASSERT_TRUE(items[0].is_list());
  EXPECT_EQ(items[0].items[1].items[1].atom, "|c d|");
  EXPECT_EQ(items[1].atom, "x");
  EXPECT_THROW(parse_sexprs("(a"), std::invalid_argument);
}

}  // namespace
}  // namespace lnn
