#pragma once

#include <Eigen/Dense>

#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lnn/polynomial.hpp"

namespace lnn {

/// f(0) != 0 for some component.
class EquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Polynomial vector field with its equilibrium at the origin.
class VectorField {
 public:
  /// Throws EquilibriumError if any component has a nonzero constant term.
  VectorField(std::vector<std::string> variable_names, std::vector<Polynomial> components);

  std::size_t dimension() const { return components_.size(); }
  const std::vector<Polynomial>& components() const { return components_; }
  const Polynomial& component(std::size_t i) const { return components_.at(i); }
  const std::vector<std::string>& variable_names() const { return names_; }

  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::vector<Rational> operator()(std::span<const Rational> x) const;

  /// Columnwise evaluation of a batch of points (n x N).
  Eigen::MatrixXd evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

 private:
  std::vector<std::string> names_;
  std::vector<Polynomial> components_;
  std::vector<PolynomialXd> float_components_;
};

enum class DomainKind { kBall, kOrthantBall, kOrthantAnnulus };

std::string to_string(DomainKind kind);

/// Region D. Membership is decided on the squared norm, so every constraint
/// is polynomial: ||x||^2 <= gamma^2, x_i >= 0 (orthant kinds) and
/// ||x||^2 >= rho^2 (annulus).
struct DomainSpec {
  DomainKind kind = DomainKind::kBall;
  Rational gamma = 1;
  Rational rho = 0;

  static DomainSpec ball(Rational gamma);
  static DomainSpec orthant_ball(Rational gamma);
  static DomainSpec orthant_annulus(Rational rho, Rational gamma);

  /// Throws std::invalid_argument when the radii are inconsistent.
  void validate() const;

  bool orthant() const { return kind != DomainKind::kBall; }
  bool contains(std::span<const Rational> x) const;
  /// Exact test of the double's binary value.
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Floating-point test, for bulk sampling only.
  bool contains_approx(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  std::string describe() const;
  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Uniform point of D by rejection from its bounding box (floating-point
/// membership test; never the origin).
Eigen::VectorXd sample_domain(const DomainSpec& domain, std::size_t dimension, std::mt19937_64& rng);

struct SystemDefinition {
  VectorField field;
  std::optional<DomainSpec> domain;
};

/// Parses the system-file format:
///   vars: x, y
///   x' = -x + x*y
///   y' = -y
///   domain: ball 100        (or orthant_ball G, orthant_annulus R G)
/// `#` starts a comment. Throws ParseError / EquilibriumError.
SystemDefinition parse_system(std::string_view text);
SystemDefinition load_system_file(const std::string& path);

/// Renders a system file that parse_system reads back to the same system.
std::string format_system(const VectorField& field, const std::optional<DomainSpec>& domain);

struct Benchmark {
  std::string id;
  std::string description;
  VectorField field;
  DomainSpec default_domain;
};

/// Built-in systems: parrilo, square2d, easy3d, hard3d.
const std::vector<Benchmark>& benchmarks();
/// Throws std::invalid_argument for an unknown id.
const Benchmark& benchmark(std::string_view id);

}  // namespace lnn
