#include "lnn/translation.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lnn/errors.hpp"

namespace lnn {

namespace {

Rational exact(double w, const char* where) {
  if (!std::isfinite(w)) {
    throw std::invalid_argument(std::string("rationalize_weights: non-finite weight in ") + where);
  }
  return rational_from_double(w);
}

}  // namespace

ExactNetwork rationalize_weights(const Lnn& net) {
  ExactNetwork out{net.shape(), {}, {}};
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const auto& w = net.hidden_weights(i);
    RationalMatrix m{static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(w.cols()), {}};
    m.data.reserve(m.rows * m.cols);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) m.data.push_back(exact(w(r, c), "hidden layer"));
    }
    out.hidden.push_back(std::move(m));
  }
  for (Eigen::Index c = 0; c < net.output_weights().size(); ++c) {
    out.output.push_back(exact(net.output_weights()[c], "output layer"));
  }
  return out;
}

Polynomial expand_network(const ExactNetwork& net, unsigned degree_cap) {
  const unsigned degree = net.shape.total_degree();
  if (degree > degree_cap) {
    throw ExpansionError("expand_network: total degree " + std::to_string(degree) + " exceeds cap " +
                         std::to_string(degree_cap));
  }
  const std::size_t n = net.shape.input_dim;
  std::vector<Polynomial> z;
  for (std::size_t j = 0; j < n; ++j) z.push_back(Polynomial::variable(n, j));
  for (std::size_t i = 0; i < net.hidden.size(); ++i) {
    const RationalMatrix& w = net.hidden[i];
    const unsigned d = net.shape.activation_degrees[i];
    std::vector<Polynomial> next;
    next.reserve(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
      Polynomial u(n);
      for (std::size_t c = 0; c < w.cols; ++c) u += z[c] * w(r, c);
      next.push_back(pow(u, d));
    }
    z = std::move(next);
  }
  Polynomial v(n);
  for (std::size_t r = 0; r < z.size(); ++r) v += z[r] * net.output[r];
  return v;
}

Polynomial expand_network(const Lnn& net, unsigned degree_cap) {
  return expand_network(rationalize_weights(net), degree_cap);
}

Polynomial lie_derivative(const Polynomial& v, const VectorField& f) {
  if (v.dimension() != f.dimension()) throw std::invalid_argument("lie_derivative: dimension mismatch");
  Polynomial out(v.dimension());
  for (std::size_t i = 0; i < f.dimension(); ++i) out += partial(v, i) * f.component(i);
  return out;
}

CertificateCandidate make_candidate(const Lnn& net, const VectorField& f, unsigned degree_cap) {
  if (net.shape().input_dim != f.dimension()) throw std::invalid_argument("make_candidate: dimension mismatch");
  ExactNetwork exact_net = rationalize_weights(net);
  Polynomial v = expand_network(exact_net, degree_cap);
  Polynomial vdot = lie_derivative(v, f);
  return CertificateCandidate{std::move(v), std::move(vdot), f.variable_names(), net, std::move(exact_net)};
}

CertificateCandidate make_candidate(const Polynomial& v, const VectorField& f) {
  return CertificateCandidate{v, lie_derivative(v, f), f.variable_names(), std::nullopt, std::nullopt};
}

void write_certificate(std::ostream& out, const CertificateCandidate& cand) {
  out << "lnn-certificate 1\n";
  out << "vars: ";
  for (std::size_t i = 0; i < cand.variable_names.size(); ++i) out << (i ? ", " : "") << cand.variable_names[i];
  out << "\nV = " << to_string(cand.v, cand.variable_names) << '\n';
  if (!cand.weights) return;
  const ExactNetwork& w = *cand.weights;
  out << "# exact weights, row-major\n";
  out << "# hidden";
  for (auto h : w.shape.hidden_widths) out << ' ' << h;
  out << " degrees";
  for (auto d : w.shape.activation_degrees) out << ' ' << d;
  out << '\n';
  for (std::size_t i = 0; i < w.hidden.size(); ++i) {
    const RationalMatrix& m = w.hidden[i];
    out << "# W" << (i + 1) << ' ' << m.rows << ' ' << m.cols << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
      out << "#";
      for (std::size_t c = 0; c < m.cols; ++c) out << ' ' << to_string(m(r, c));
      out << '\n';
    }
  }
  out << "# output " << w.output.size() << "\n#";
  for (const auto& c : w.output) out << ' ' << to_string(c);
  out << '\n';
}

std::string format_certificate(const CertificateCandidate& cand) {
  std::ostringstream out;
  write_certificate(out, cand);
  return out.str();
}

StoredCertificate read_certificate(std::istream& in) {
  std::vector<std::string> vars;
  std::optional<Polynomial> v;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("lnn-certificate", 0) == 0) continue;
    if (line.rfind("vars:", 0) == 0) {
      std::istringstream names(line.substr(5));
      for (std::string name; std::getline(names, name, ',');) {
        const auto b = name.find_first_not_of(" \t");
        const auto e = name.find_last_not_of(" \t\r");
        if (b == std::string::npos) throw ParseError("empty variable name", line_no, 1);
        vars.push_back(name.substr(b, e - b + 1));
      }
    } else if (line.rfind("V =", 0) == 0) {
      if (vars.empty()) throw ParseError("'V =' before 'vars:'", line_no, 1);
      try {
        v = parse_polynomial(std::string_view(line).substr(3), vars);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no, 3 + e.column());
      }
    } else {
      throw ParseError("unexpected line in certificate", line_no, 1);
    }
  }
  if (!v) throw ParseError("certificate has no 'V =' line", line_no, 1);
  if (v->constant_term() != 0) throw std::invalid_argument("certificate V has a nonzero constant term");
  return StoredCertificate{std::move(vars), std::move(*v)};
}

StoredCertificate load_certificate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open certificate '" + path + "'");
  return read_certificate(in);
}

}  // namespace lnn
