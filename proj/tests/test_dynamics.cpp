#include <gtest/gtest.h>

#include <filesystem>

#include "lnn/errors.hpp"
#include "support.hpp"

namespace lnn {
namespace {

using test::poly;

TEST(SystemFile, LoadsPlanarExample) {
  const SystemDefinition def = parse_system("vars: x, y\nx' = -x + x*y\ny' = -y\n");
  ASSERT_EQ(def.field.dimension(), 2u);
  EXPECT_EQ(def.field.component(0), poly("-x + x*y"));
  EXPECT_EQ(def.field.component(1), poly("-y"));
  EXPECT_FALSE(def.domain.has_value());
}

TEST(SystemFile, LoadsThreeDimensionalExample) {
  const SystemDefinition def = parse_system(
      "# coupled system\n"
      "vars: x, y, z\n"
      "x' = -x\n"
      "y' = -2*y + 0.1*x*y^2 + z   # decimal is exact\n"
      "z' = -z - 1.5*y\n"
      "domain: orthant_ball 1000\n");
  EXPECT_EQ(def.field.component(1), parse_polynomial("-2*y + 1/10*x*y^2 + z", test::kXYZ));
  EXPECT_EQ(def.field.component(2), parse_polynomial("-z - 3/2*y", test::kXYZ));
  ASSERT_TRUE(def.domain.has_value());
  EXPECT_EQ(*def.domain, DomainSpec::orthant_ball(1000));
}

TEST(SystemFile, EquilibriumViolationNamesComponent) {
  try {
    parse_system("vars: x\nx' = 1 - x\n");
    FAIL();
  } catch (const EquilibriumError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("equilibrium violation"), std::string::npos);
    EXPECT_NE(msg.find("x'"), std::string::npos);
  }
}

TEST(SystemFile, StructuralErrors) {
  EXPECT_THROW(parse_system("x' = -x\n"), ParseError);
  EXPECT_THROW(parse_system("vars: x, y\nx' = -x\n"), ParseError);
  EXPECT_THROW(parse_system("vars: x\nx' = -x\nx' = -2*x\n"), ParseError);
  EXPECT_THROW(parse_system("vars: x\nq' = -x\n"), ParseError);
  EXPECT_THROW(parse_system("vars: x, x\nx' = -x\n"), ParseError);
  EXPECT_THROW(parse_system("vars: x\nx' = -x\ndomain: cube 3\n"), ParseError);
  EXPECT_THROW(parse_system("vars: x\nx' = -x + q\n"), ParseError);
}

TEST(SystemFile, FormatRoundTrip) {
  for (const auto& b : benchmarks()) {
    const std::string text = format_system(b.field, b.default_domain);
    const SystemDefinition back = parse_system(text);
    EXPECT_EQ(back.field.components(), b.field.components()) << b.id;
    EXPECT_EQ(back.field.variable_names(), b.field.variable_names());
    EXPECT_EQ(*back.domain, b.default_domain);
  }
}

TEST(SystemFile, ShippedFilesMatchRegistry) {
  for (const auto& b : benchmarks()) {
    const std::string path = std::string(LNN_SYSTEMS_DIR) + "/" + b.id + ".ode";
    const SystemDefinition def = load_system_file(path);
    EXPECT_EQ(def.field.components(), b.field.components()) << path;
    EXPECT_EQ(*def.domain, b.default_domain) << path;
  }
  EXPECT_THROW(load_system_file("/nonexistent/missing.ode"), std::runtime_error);
}

TEST(FieldEval, Examples) {
  const VectorField f5 = test::parrilo();
  EXPECT_EQ(f5(Eigen::Vector2d(1, 1)), Eigen::Vector2d(0, -1));
  EXPECT_EQ(f5(Eigen::Vector2d(0, 0)), Eigen::Vector2d(0, 0));
  EXPECT_EQ(benchmark("square2d").field(Eigen::Vector2d(1, 1)), Eigen::Vector2d(1, -1));
  EXPECT_THROW(f5(Eigen::Vector3d(1, 1, 1)), std::invalid_argument);
}

TEST(FieldEval, BenchmarksMatchHandCodedEquations) {
  using Fn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  const std::vector<std::pair<std::string, Fn>> oracles = {
      {"parrilo", [](const Eigen::VectorXd& s) { return Eigen::Vector2d(-s[0] + s[0] * s[1], -s[1]).eval(); }},
      {"square2d",
       [](const Eigen::VectorXd& s) { return Eigen::Vector2d(-s[0] + 2 * s[0] * s[0] * s[1], -s[1]).eval(); }},
      {"easy3d",
       [](const Eigen::VectorXd& s) {
         return Eigen::Vector3d(-s[0], -2 * s[1] + 0.1 * s[0] * s[1] * s[1] + s[2], -s[2] - 1.5 * s[1]).eval();
       }},
      {"hard3d",
       [](const Eigen::VectorXd& s) {
         return Eigen::Vector3d(-3 * s[0] - 0.1 * s[0] * s[1] * s[1] * s[1], -s[1] + s[2], -s[2]).eval();
       }},
  };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-50, 50);
  for (const auto& [id, oracle] : oracles) {
    const VectorField& f = benchmark(id).field;
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(f.dimension()));
      for (auto& v : x) v = coord(rng);
      const Eigen::VectorXd expected = oracle(x);
      const Eigen::VectorXd got = f(x);
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        EXPECT_LE(std::abs(got[k] - expected[k]), 1e-12 * std::max(1.0, std::abs(expected[k]))) << id;
      }
    }
  }
  EXPECT_THROW(benchmark("lorenz"), std::invalid_argument);
}

TEST(Domain, ContainsExamples) {
  EXPECT_TRUE(DomainSpec::ball(100).contains(test::point({10, 2})));
  EXPECT_FALSE(DomainSpec::orthant_ball(1).contains(test::point({Rational(-1, 2), Rational(1, 2)})));
  EXPECT_FALSE(
      DomainSpec::orthant_annulus(Rational(1, 10), 1).contains(test::point({Rational(1, 20), 0})));
  EXPECT_TRUE(DomainSpec::orthant_annulus(Rational(1, 10), 1).contains(test::point({Rational(1, 10), 0})));
  EXPECT_TRUE(DomainSpec::ball(5).contains(test::point({3, 4})));
  EXPECT_FALSE(DomainSpec::ball(5).contains(test::point({3, Rational(4000001, 1000000)})));
}

TEST(Domain, Validation) {
  EXPECT_THROW(DomainSpec::ball(0).validate(), std::invalid_argument);
  EXPECT_THROW(DomainSpec::orthant_annulus(2, 1).validate(), std::invalid_argument);
  EXPECT_THROW(DomainSpec::orthant_annulus(0, 1).validate(), std::invalid_argument);
  EXPECT_NO_THROW(DomainSpec::orthant_annulus(Rational(1, 10), 1).validate());
  EXPECT_EQ(DomainSpec::orthant_annulus(Rational(1, 10), 1).describe(), "orthant_annulus 1/10 1");
}

TEST(Domain, MembershipIsMonotoneInGamma) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-20, 20), radius(0.1, 30);
  for (int i = 0; i < 500; ++i) {
    const std::vector<Rational> x = {rational_from_double(coord(rng)), rational_from_double(coord(rng))};
    const Rational g1 = rational_from_double(radius(rng));
    const Rational g2 = g1 + rational_from_double(radius(rng));
    for (bool orthant : {false, true}) {
      const auto d1 = orthant ? DomainSpec::orthant_ball(g1) : DomainSpec::ball(g1);
      const auto d2 = orthant ? DomainSpec::orthant_ball(g2) : DomainSpec::ball(g2);
      if (d1.contains(x)) EXPECT_TRUE(d2.contains(x));
    }
  }
}

TEST(Domain, SamplesLieInsideAndAvoidOrigin) {
  std::mt19937_64 rng(9);
  const DomainSpec annulus = DomainSpec::orthant_annulus(Rational(1, 2), 1);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd x = sample_domain(annulus, 3, rng);
    EXPECT_TRUE(annulus.contains(x));
    EXPECT_GE(x.minCoeff(), 0.0);
  }
}

}  // namespace
}  // namespace lnn
