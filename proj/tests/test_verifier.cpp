#include <gtest/gtest.h>

#include "lnn/logging.hpp"
#include "lnn/solver_process.hpp"
#include "lnn/verifier.hpp"
#include "support.hpp"

namespace lnn {
namespace {

using test::poly;

class VerifierTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!test::solver_available()) GTEST_SKIP() << "z3 not on PATH";
  }
};

CertificateCandidate walkthrough_candidate() { return make_candidate(poly("x^2 + y^2"), test::parrilo()); }

TEST(ValidateCounterexample, Examples) {
  const auto cand = walkthrough_candidate();
  const auto d = DomainSpec::ball(100);
  EXPECT_TRUE(validate_counterexample(cand, test::point({10, 2}), QueryKind::kPhi1, d));
  EXPECT_FALSE(validate_counterexample(cand, test::point({0, 0}), QueryKind::kPhi1, d));
  EXPECT_FALSE(validate_counterexample(cand, test::point({200, 0}), QueryKind::kPhi1, d));
  EXPECT_FALSE(validate_counterexample(cand, test::point({1, 1}), QueryKind::kPhi1, d));
  EXPECT_FALSE(validate_counterexample(cand, test::point({10, 2}), QueryKind::kPhi2, d));
  EXPECT_FALSE(validate_counterexample(cand, test::point({10}), QueryKind::kPhi1, d));
}

TEST(Augment, Examples) {
  const auto d = DomainSpec::ball(100);
  const Eigen::Vector2d c(10, 2);
  const auto pts = augment_counterexample(c, d, 20, 0.05, 1);
  ASSERT_EQ(pts.size(), 21u);
  EXPECT_EQ(pts[0], c);
  for (const auto& p : pts) {
    EXPECT_TRUE(d.contains(p));
    EXPECT_LE((p - c).norm(), 5.0 + 1e-12);
  }
  EXPECT_EQ(augment_counterexample(c, d, 0, 0.05, 1).size(), 1u);
  EXPECT_EQ(augment_counterexample(c, d, 20, 0.05, 9), augment_counterexample(c, d, 20, 0.05, 9));

  const Eigen::Vector2d boundary(60, 80);
  for (const auto& p : augment_counterexample(boundary, d, 50, 0.05, 3)) EXPECT_TRUE(d.contains(p));
}

TEST(Augment, DegenerateGeometryWarns) {
  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view m) { warnings.emplace_back(m); });
  // A shell far thinner than the neighbourhood radius rejects every draw.
  const auto d = DomainSpec::orthant_annulus(1 - Rational(1, 1000000000000000), 1);
  const auto pts = augment_counterexample(Eigen::Vector3d(1, 0, 0), d, 5, 0.05, 2);
  set_warning_sink(nullptr);
  EXPECT_EQ(pts.size(), 1u);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Fallback, FindsWalkthroughViolation) {
  const auto cand = walkthrough_candidate();
  const auto d = DomainSpec::ball(100);
  const auto cex = fallback_falsify(cand, d, 5000, 3);
  ASSERT_TRUE(cex.has_value());
  EXPECT_TRUE(validate_counterexample(cand, cex->point, cex->which, d));
  EXPECT_EQ(cex->source, "fallback");
}

TEST(Fallback, NothingForValidCandidateOrZeroBudget) {
  const auto valid = make_candidate(poly("x^2 + y^2"), test::linear2d());
  EXPECT_FALSE(fallback_falsify(valid, DomainSpec::ball(100), 20000, 1).has_value());
  EXPECT_FALSE(fallback_falsify(walkthrough_candidate(), DomainSpec::ball(100), 0, 1).has_value());
}

TEST(Fallback, FindsViolationNearOrigin) {
  // V is positive and decreasing far out but V-dot >= 0 along a cone at small radius.
  const VectorField f(test::kXY, {poly("x - x^3"), poly("-y")});
  const auto cand = make_candidate(poly("x^2 + y^2"), f);
  const auto cex = fallback_falsify(cand, DomainSpec::ball(10), 20000, 2);
  ASSERT_TRUE(cex.has_value());
  EXPECT_TRUE(validate_counterexample(cand, cex->point, cex->which, DomainSpec::ball(10)));
}

TEST(SampledCheck, CleanForValidCandidate) {
  const auto valid = make_candidate(poly("x^2 + y^2"), test::linear2d());
  const SampledCheck s = sampled_violation_check(valid, DomainSpec::ball(10), 100000, 4);
  EXPECT_EQ(s.samples, 100000u);
  EXPECT_EQ(s.violations, 0u);
  const SampledCheck bad = sampled_violation_check(walkthrough_candidate(), DomainSpec::ball(100), 10000, 4);
  EXPECT_GT(bad.violations, 0u);
  ASSERT_TRUE(bad.first_violation);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.time_limit_seconds = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.executable.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Process, CapturesOutputAndKillsOnDeadline) {
  const ProcessResult echo = run_process("cat", {}, "hello", 5.0);
  EXPECT_TRUE(echo.launched);
  EXPECT_EQ(echo.stdout_text, "hello");
  EXPECT_EQ(echo.exit_code, 0);
  const ProcessResult slow = run_process("sleep", {"10"}, "", 0.2);
  EXPECT_TRUE(slow.timed_out);
  EXPECT_LT(slow.seconds, 5.0);
  EXPECT_FALSE(run_process("/nonexistent/solver", {}, "", 1.0).launched);
}

TEST_F(VerifierTest, WalkthroughQueries) {
  const auto [phi1, phi2] = build_queries(walkthrough_candidate(), DomainSpec::ball(100));
  const QueryResult r1 = run_query(phi1, SolverConfig{});
  ASSERT_EQ(r1.status, QueryStatus::kSat);
  ASSERT_TRUE(r1.model);
  EXPECT_TRUE(validate_counterexample(walkthrough_candidate(), *r1.model, QueryKind::kPhi1, DomainSpec::ball(100)));
  EXPECT_EQ(run_query(phi2, SolverConfig{}).status, QueryStatus::kUnsat);
}

TEST_F(VerifierTest, TinyTimeLimitGivesTimeout) {
  const auto cand = make_candidate(parse_polynomial("x^2 + 2*y^2 + 3*z^2 + x*y*z + x^4", test::kXYZ),
                                   benchmark("hard3d").field);
  SolverConfig cfg;
  cfg.time_limit_seconds = 0.001;
  const QueryResult r = run_query(build_queries(cand, DomainSpec::orthant_ball(1000)).first, cfg);
  EXPECT_EQ(r.status, QueryStatus::kUnknown);
  EXPECT_EQ(r.reason, "timeout");
}

TEST_F(VerifierTest, MissingSolverIsSolverError) {
  SolverConfig cfg;
  cfg.executable = "/nonexistent/z3";
  const VerifierVerdict v = verify(walkthrough_candidate(), DomainSpec::ball(100), cfg);
  EXPECT_EQ(v.kind, VerdictKind::kUnknown);
  EXPECT_EQ(v.reason, "solver-error");
}

TEST_F(VerifierTest, GarbageSolverIsSolverError) {
  SolverConfig cfg;
  cfg.executable = "echo";
  cfg.args = {"banana"};
  const QueryResult r = run_query(build_queries(walkthrough_candidate(), DomainSpec::ball(100)).second, cfg);
  EXPECT_EQ(r.status, QueryStatus::kUnknown);
  EXPECT_EQ(r.reason, "solver-error");
  EXPECT_NE(r.solver_output.find("banana"), std::string::npos);
}

TEST_F(VerifierTest, Verdicts) {
  const VerifierVerdict valid =
      verify(make_candidate(poly("x^2 + y^2"), test::linear2d()), DomainSpec::ball(10), SolverConfig{});
  EXPECT_EQ(valid.kind, VerdictKind::kValid);
  EXPECT_TRUE(valid.counterexamples.empty());

  const VerifierVerdict falsified = verify(walkthrough_candidate(), DomainSpec::ball(100), SolverConfig{});
  ASSERT_EQ(falsified.kind, VerdictKind::kFalsified);
  for (const auto& c : falsified.counterexamples) {
    EXPECT_TRUE(validate_counterexample(walkthrough_candidate(), c.point, c.which, DomainSpec::ball(100)));
  }
}

TEST_F(VerifierTest, QueryOrderAndConcurrencyDoNotMatter) {
  const auto cands = {walkthrough_candidate(), make_candidate(poly("x^2 - y^2"), test::linear2d()),
                      make_candidate(poly("x^2 + y^2"), test::linear2d())};
  for (const auto& cand : cands) {
    VerifyOptions seq;
    seq.parallel = false;
    const auto a = verify(cand, DomainSpec::ball(10), SolverConfig{}, seq);
    const auto b = verify(cand, DomainSpec::ball(10), SolverConfig{});
    ASSERT_EQ(a.queries.size(), 2u);
    ASSERT_EQ(b.queries.size(), 2u);
    EXPECT_EQ(a.kind, b.kind);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a.queries[i].status, b.queries[i].status);
    const auto [phi1, phi2] = build_queries(cand, DomainSpec::ball(10));
    EXPECT_EQ(run_query(phi2, SolverConfig{}).status, a.queries[1].status);
    EXPECT_EQ(run_query(phi1, SolverConfig{}).status, a.queries[0].status);
  }
}

TEST_F(VerifierTest, BothWitnessesAreReturned) {
  // Indefinite V: phi2 is sat; the saddle field makes phi1 sat too.
  const VectorField saddle(test::kXY, {poly("x"), poly("-y")});
  const auto cand = make_candidate(poly("x^2 - y^2"), saddle);
  const VerifierVerdict v = verify(cand, DomainSpec::ball(10), SolverConfig{});
  ASSERT_EQ(v.kind, VerdictKind::kFalsified);
  bool phi1 = false, phi2 = false;
  for (const auto& c : v.counterexamples) {
    phi1 |= c.which == QueryKind::kPhi1;
    phi2 |= c.which == QueryKind::kPhi2;
    EXPECT_TRUE(validate_counterexample(cand, c.point, c.which, DomainSpec::ball(10)));
  }
  EXPECT_TRUE(phi1);
  EXPECT_TRUE(phi2);
}

TEST_F(VerifierTest, ScriptsAreReportedAndDeterministic) {
  std::vector<std::string> first, second;
  VerifyOptions o;
  o.parallel = false;
  o.on_script = [&](QueryKind, const std::string& s) { first.push_back(s); };
  verify(walkthrough_candidate(), DomainSpec::ball(100), SolverConfig{}, o);
  o.on_script = [&](QueryKind, const std::string& s) { second.push_back(s); };
  verify(walkthrough_candidate(), DomainSpec::ball(100), SolverConfig{}, o);
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first, second);
}

}  // namespace
}  // namespace lnn
