#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lnn/dynamics.hpp"
#include "lnn/network.hpp"
#include "lnn/polynomial.hpp"

namespace lnn {

/// Row-major dense matrix of exact rationals.
struct RationalMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Rational> data;

  const Rational& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// The network with every double weight replaced by the rational it denotes.
struct ExactNetwork {
  NetworkShape shape;
  std::vector<RationalMatrix> hidden;
  std::vector<Rational> output;
};

/// Exact conversion (no rounding). Throws std::invalid_argument on NaN/inf.
ExactNetwork rationalize_weights(const Lnn& net);

class ExpansionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr unsigned kDefaultDegreeCap = 12;

/// Closed-form V as an exact polynomial, composing layers symbolically.
/// Throws ExpansionError when the total degree exceeds `degree_cap`.
Polynomial expand_network(const ExactNetwork& net, unsigned degree_cap = kDefaultDegreeCap);
Polynomial expand_network(const Lnn& net, unsigned degree_cap = kDefaultDegreeCap);

/// sum_i dv/dx_i * f_i, exactly.
Polynomial lie_derivative(const Polynomial& v, const VectorField& f);

/// Exact V and V-dot for verification, with the network they came from
/// (absent when a certificate is loaded from text).
struct CertificateCandidate {
  Polynomial v;
  Polynomial vdot;
  std::vector<std::string> variable_names;
  std::optional<Lnn> source_net;
  std::optional<ExactNetwork> weights;

  std::size_t dimension() const { return v.dimension(); }
};

CertificateCandidate make_candidate(const Lnn& net, const VectorField& f, unsigned degree_cap = kDefaultDegreeCap);
CertificateCandidate make_candidate(const Polynomial& v, const VectorField& f);

/// Certificate text: header, `vars:` line, `V = <poly>` in canonical
/// graded-lex order, then the exact weight table when available.
void write_certificate(std::ostream& out, const CertificateCandidate& cand);
std::string format_certificate(const CertificateCandidate& cand);

struct StoredCertificate {
  std::vector<std::string> variable_names;
  Polynomial v;
};

/// Reads the `vars:` and `V =` lines; the weight table is informational.
StoredCertificate read_certificate(std::istream& in);
StoredCertificate load_certificate(const std::string& path);

}  // namespace lnn
