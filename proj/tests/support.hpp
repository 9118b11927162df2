#pragma once

#include <cstdlib>
#include <random>
#include <string>

#include "lnn/dynamics.hpp"
#include "lnn/network.hpp"
#include "lnn/polynomial.hpp"

namespace lnn::test {

inline const std::vector<std::string> kXY = {"x", "y"};
inline const std::vector<std::string> kXYZ = {"x", "y", "z"};

inline Polynomial poly(const std::string& text, const std::vector<std::string>& vars = kXY) {
  return parse_polynomial(text, vars);
}

inline VectorField parrilo() { return benchmark("parrilo").field; }

inline VectorField linear2d() { return VectorField(kXY, {poly("-x"), poly("-y")}); }

/// The two-neuron, one-layer net of the walkthrough:
/// V = w5 (w1 x + w3 y)^2 + w6 (w2 x + w4 y)^2 with w5 = w6 = 1.
inline Lnn fig1_net(double w1, double w2, double w3, double w4) {
  Eigen::MatrixXd w(2, 2);
  w << w1, w3, w2, w4;
  return Lnn(NetworkShape{2, {2}, {2}}, LastLayerMode::kFixedOnes, {w}, Eigen::RowVector2d::Ones());
}

inline Lnn identity_net() { return fig1_net(1, 0, 0, 1); }

inline std::vector<Rational> point(std::initializer_list<Rational> values) { return std::vector<Rational>(values); }

/// Small random rational with denominator up to 8.
inline Rational random_rational(std::mt19937_64& rng, int magnitude = 9) {
  std::uniform_int_distribution<int> num(-magnitude * 8, magnitude * 8);
  std::uniform_int_distribution<int> den(1, 8);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return q;
}

inline Polynomial random_polynomial(std::mt19937_64& rng, std::size_t dim, unsigned max_degree, std::size_t terms) {
  Polynomial p(dim);
  std::uniform_int_distribution<unsigned> deg(0, max_degree);
  for (std::size_t t = 0; t < terms; ++t) {
    std::vector<unsigned> e(dim, 0);
    unsigned budget = deg(rng);
    for (std::size_t i = 0; i < dim && budget > 0; ++i) {
      std::uniform_int_distribution<unsigned> take(0, budget);
      e[i] = i + 1 == dim ? budget : take(rng);
      budget -= e[i];
    }
    p.add_term(Monomial(e), random_rational(rng));
  }
  return p;
}

/// Random shape with k <= 2, widths <= 10 and degrees in {2, 4}.
inline NetworkShape random_shape(std::mt19937_64& rng, std::size_t input_dim) {
  std::uniform_int_distribution<std::size_t> depth(1, 2), width(1, 10);
  std::bernoulli_distribution quartic(0.3);
  NetworkShape s{input_dim, {}, {}};
  const std::size_t k = depth(rng);
  for (std::size_t i = 0; i < k; ++i) {
    s.hidden_widths.push_back(width(rng));
    s.activation_degrees.push_back(quartic(rng) ? 4u : 2u);
  }
  return s;
}

inline bool solver_available() { return std::system("z3 -version > /dev/null 2>&1") == 0; }

}  // namespace lnn::test
