#include "lnn/dynamics.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "lnn/errors.hpp"

namespace lnn {

VectorField::VectorField(std::vector<std::string> variable_names, std::vector<Polynomial> components)
    : names_(std::move(variable_names)), components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("vector field needs at least one component");
  if (names_.size() != components_.size()) {
    throw std::invalid_argument("vector field: one component per variable required");
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].dimension() != components_.size()) {
      throw std::invalid_argument("vector field component " + names_[i] + " has wrong dimension");
    }
    const Rational at_origin = components_[i].constant_term();
    if (at_origin != 0) {
      throw EquilibriumError("equilibrium violation: component " + names_[i] + "' has f(0) = " +
                             to_string(at_origin) + " (must be 0)");
    }
    float_components_.push_back(components_[i].cast<double>());
  }
}

Eigen::VectorXd VectorField::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw std::invalid_argument("field_eval: dimension mismatch");
  }
  Eigen::VectorXd out(dimension());
  const Eigen::VectorXd point = x;
  for (std::size_t i = 0; i < dimension(); ++i) out[i] = float_components_[i](point);
  return out;
}

std::vector<Rational> VectorField::operator()(std::span<const Rational> x) const {
  if (x.size() != dimension()) throw std::invalid_argument("field_eval: dimension mismatch");
  std::vector<Rational> out;
  for (const auto& c : components_) out.push_back(c(x));
  return out;
}

Eigen::MatrixXd VectorField::evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (static_cast<std::size_t>(points.rows()) != dimension()) {
    throw std::invalid_argument("field_eval: dimension mismatch");
  }
  Eigen::MatrixXd out(points.rows(), points.cols());
  Eigen::VectorXd column(points.rows());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    column = points.col(j);
    for (std::size_t i = 0; i < dimension(); ++i) out(static_cast<Eigen::Index>(i), j) = float_components_[i](column);
  }
  return out;
}

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::kBall: return "ball";
    case DomainKind::kOrthantBall: return "orthant_ball";
    case DomainKind::kOrthantAnnulus: return "orthant_annulus";
  }
  return "?";
}

DomainSpec DomainSpec::ball(Rational gamma) {
  DomainSpec d{DomainKind::kBall, std::move(gamma), 0};
  d.validate();
  return d;
}

DomainSpec DomainSpec::orthant_ball(Rational gamma) {
  DomainSpec d{DomainKind::kOrthantBall, std::move(gamma), 0};
  d.validate();
  return d;
}

DomainSpec DomainSpec::orthant_annulus(Rational rho, Rational gamma) {
  DomainSpec d{DomainKind::kOrthantAnnulus, std::move(gamma), std::move(rho)};
  d.validate();
  return d;
}

void DomainSpec::validate() const {
  if (gamma <= 0) throw std::invalid_argument("domain: gamma must be positive");
  if (kind == DomainKind::kOrthantAnnulus) {
    if (rho <= 0 || rho >= gamma) throw std::invalid_argument("domain: annulus requires 0 < rho < gamma");
  } else if (rho != 0) {
    throw std::invalid_argument("domain: rho is only meaningful for orthant_annulus");
  }
}

bool DomainSpec::contains(std::span<const Rational> x) const {
  Rational norm2 = 0;
  for (const auto& xi : x) {
    if (orthant() && xi < 0) return false;
    norm2 += xi * xi;
  }
  if (norm2 > gamma * gamma) return false;
  if (kind == DomainKind::kOrthantAnnulus && norm2 < rho * rho) return false;
  return true;
}

bool DomainSpec::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  std::vector<Rational> exact;
  exact.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) exact.push_back(rational_from_double(x[i]));
  return contains(std::span<const Rational>(exact));
}

bool DomainSpec::contains_approx(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (orthant() && (x.array() < 0).any()) return false;
  const double norm2 = x.squaredNorm();
  const double g = gamma.get_d();
  if (norm2 > g * g) return false;
  if (kind == DomainKind::kOrthantAnnulus) {
    const double r = rho.get_d();
    if (norm2 < r * r) return false;
  }
  return true;
}

std::string DomainSpec::describe() const {
  std::string out = to_string(kind);
  if (kind == DomainKind::kOrthantAnnulus) out += " " + to_string(rho);
  return out + " " + to_string(gamma);
}

Eigen::VectorXd sample_domain(const DomainSpec& domain, std::size_t dimension, std::mt19937_64& rng) {
  const double g = domain.gamma.get_d();
  std::uniform_real_distribution<double> coord(domain.orthant() ? 0.0 : -g, g);
  Eigen::VectorXd x(static_cast<Eigen::Index>(dimension));
  while (true) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = coord(rng);
    if (domain.contains_approx(x) && !(x.array() == 0.0).all()) return x;
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

Rational parse_radius(const std::string& word, std::size_t line) {
  try {
    return parse_rational(word);
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed radius '" + word + "'", line, 1);
  }
}

}  // namespace

SystemDefinition parse_system(std::string_view text) {
  std::vector<std::string> vars;
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::optional<DomainSpec> domain;
  std::size_t vars_line = 0;

  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.rfind("vars:", 0) == 0) {
      if (!vars.empty()) throw ParseError("duplicate 'vars:' line", line_no, 1);
      std::string list = line.substr(5);
      std::istringstream names(list);
      for (std::string name; std::getline(names, name, ',');) {
        name = trim(name);
        if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) {
          throw ParseError("bad variable name '" + name + "'", line_no, 1);
        }
        for (char c : name) {
          if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
            throw ParseError("bad variable name '" + name + "'", line_no, 1);
          }
        }
        for (const auto& v : vars) {
          if (v == name) throw ParseError("duplicate variable '" + name + "'", line_no, 1);
        }
        vars.push_back(name);
      }
      if (vars.empty()) throw ParseError("'vars:' declares no variables", line_no, 1);
      vars_line = line_no;
    } else if (line.rfind("domain:", 0) == 0) {
      const auto words = split_words(line.substr(7));
      try {
        if (words.size() == 2 && words[0] == "ball") {
          domain = DomainSpec::ball(parse_radius(words[1], line_no));
        } else if (words.size() == 2 && words[0] == "orthant_ball") {
          domain = DomainSpec::orthant_ball(parse_radius(words[1], line_no));
        } else if (words.size() == 3 && words[0] == "orthant_annulus") {
          domain = DomainSpec::orthant_annulus(parse_radius(words[1], line_no), parse_radius(words[2], line_no));
        } else {
          throw ParseError("expected 'domain: ball G', 'orthant_ball G' or 'orthant_annulus R G'", line_no, 1);
        }
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line_no, 1);
      }
    } else {
      lines.emplace_back(line_no, raw);
    }
  }
  if (vars.empty()) throw ParseError("missing 'vars:' line", line_no + 1, 1);

  std::vector<std::optional<Polynomial>> components(vars.size());
  for (const auto& [no, raw] : lines) {
    const auto eq = raw.find('=');
    const auto name_begin = raw.find_first_not_of(" \t");
    const auto tick = raw.find('\'');
    if (eq == std::string::npos || tick == std::string::npos || tick > eq) {
      throw ParseError("expected \"<var>' = <expression>\"", no, name_begin + 1);
    }
    const std::string name = trim(std::string_view(raw).substr(name_begin, tick - name_begin));
    if (!trim(std::string_view(raw).substr(tick + 1, eq - tick - 1)).empty()) {
      throw ParseError("expected '=' after \"" + name + "'\"", no, tick + 2);
    }
    std::size_t index = vars.size();
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (vars[i] == name) index = i;
    }
    if (index == vars.size()) throw ParseError("derivative of undeclared variable '" + name + "'", no, name_begin + 1);
    if (components[index]) throw ParseError("duplicate equation for '" + name + "'", no, name_begin + 1);
    try {
      components[index] = parse_polynomial(std::string_view(raw).substr(eq + 1), vars);
    } catch (const ParseError& e) {
      // Re-anchor expression coordinates to the file.
      std::string what = e.what();
      what = what.substr(what.find(": ") + 2);
      throw ParseError(what, no, eq + 1 + e.column());
    }
  }
  std::vector<Polynomial> field;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!components[i]) throw ParseError("missing equation for '" + vars[i] + "'", vars_line, 1);
    field.push_back(*components[i]);
  }
  return SystemDefinition{VectorField(vars, std::move(field)), domain};
}

SystemDefinition load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_system(buffer.str());
}

std::string format_system(const VectorField& field, const std::optional<DomainSpec>& domain) {
  std::ostringstream out;
  out << "vars: ";
  for (std::size_t i = 0; i < field.dimension(); ++i) {
    out << (i ? ", " : "") << field.variable_names()[i];
  }
  out << '\n';
  for (std::size_t i = 0; i < field.dimension(); ++i) {
    out << field.variable_names()[i] << "' = " << to_string(field.component(i), field.variable_names()) << '\n';
  }
  if (domain) out << "domain: " << domain->describe() << '\n';
  return out.str();
}

namespace {

Benchmark make_benchmark(std::string id, std::string description, const std::string& text) {
  SystemDefinition def = parse_system(text);
  return Benchmark{std::move(id), std::move(description), std::move(def.field), *def.domain};
}

}  // namespace

const std::vector<Benchmark>& benchmarks() {
  static const std::vector<Benchmark> registry = [] {
    std::vector<Benchmark> out;
    out.push_back(make_benchmark("parrilo", "planar system x' = -x + x*y, y' = -y",
                                 "vars: x, y\n"
                                 "x' = -x + x*y\n"
                                 "y' = -y\n"
                                 "domain: ball 100\n"));
    out.push_back(make_benchmark("square2d", "planar system x' = -x + 2*x^2*y, y' = -y",
                                 "vars: x, y\n"
                                 "x' = -x + 2*x^2*y\n"
                                 "y' = -y\n"
                                 "domain: orthant_ball 100\n"));
    out.push_back(make_benchmark("easy3d", "three-dimensional system with a y^2 coupling",
                                 "vars: x, y, z\n"
                                 "x' = -x\n"
                                 "y' = -2*y + 0.1*x*y^2 + z\n"
                                 "z' = -z - 1.5*y\n"
                                 "domain: orthant_ball 1000\n"));
    out.push_back(make_benchmark("hard3d", "three-dimensional system with a y^3 coupling",
                                 "vars: x, y, z\n"
                                 "x' = -3*x - 0.1*x*y^3\n"
                                 "y' = -y + z\n"
                                 "z' = -z\n"
                                 "domain: orthant_ball 1000\n"));
    return out;
  }();
  return registry;
}

const Benchmark& benchmark(std::string_view id) {
  for (const auto& b : benchmarks()) {
    if (b.id == id) return b;
  }
  throw std::invalid_argument("unknown benchmark '" + std::string(id) +
                              "' (known: parrilo, square2d, easy3d, hard3d)");
}

}  // namespace lnn
