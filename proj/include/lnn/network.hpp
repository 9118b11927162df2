#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lnn/dynamics.hpp"

namespace lnn {

/// Depth, widths and monomial activation degrees of a bias-free network.
struct NetworkShape {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths;
  std::vector<unsigned> activation_degrees;

  /// Throws std::invalid_argument unless k >= 1, widths >= 1, degrees >= 2.
  void validate() const;
  std::size_t depth() const { return hidden_widths.size(); }
  /// Degree of V as a polynomial: the product of activation degrees.
  unsigned total_degree() const;
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

enum class LastLayerMode { kFree, kFixedOnes, kPositiveReparam };

std::string to_string(LastLayerMode mode);
/// Accepts `free`, `ones`, `positive`.
LastLayerMode parse_last_layer_mode(const std::string& text);

/// Always-positive map used by PositiveReparam output weights.
double softplus(double theta);
double softplus_inverse(double weight);

/// Candidate Lyapunov network V(x) = W_{k+1} s_k(W_k ... s_1(W_1 x)), with
/// s_i(p) = p^{d_i} elementwise and no biases, so V(0) = 0.
class Lnn {
 public:
  /// `output_parameters` are the trainable parameters of the last layer: the
  /// weights themselves (Free), the pre-softplus values (PositiveReparam), or
  /// ignored (FixedOnes).
  Lnn(NetworkShape shape, LastLayerMode mode, std::vector<Eigen::MatrixXd> hidden_weights,
      Eigen::RowVectorXd output_parameters, std::uint64_t seed = 0);

  const NetworkShape& shape() const { return shape_; }
  LastLayerMode last_layer_mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t depth() const { return hidden_.size(); }
  const Eigen::MatrixXd& hidden_weights(std::size_t layer) const { return hidden_.at(layer); }
  const std::vector<Eigen::MatrixXd>& hidden_weights() const { return hidden_; }
  /// Effective W_{k+1} (1 x h_k).
  const Eigen::RowVectorXd& output_weights() const { return output_weights_; }
  const Eigen::RowVectorXd& output_parameters() const { return output_params_; }

  void set_hidden_weights(std::size_t layer, const Eigen::MatrixXd& w);
  void set_output_parameters(const Eigen::RowVectorXd& params);

  /// Number of trainable scalars (FixedOnes output excluded).
  std::size_t num_parameters() const;

  friend bool operator==(const Lnn& a, const Lnn& b);

 private:
  void refresh_output();

  NetworkShape shape_;
  LastLayerMode mode_;
  std::vector<Eigen::MatrixXd> hidden_;
  Eigen::RowVectorXd output_params_;
  Eigen::RowVectorXd output_weights_;
  std::uint64_t seed_;
};

/// Deterministic initialization: hidden weights ~ N(0, 1/fan_in); the last
/// layer is N(0, 1/h_k) (Free), ones (FixedOnes), or softplus^-1(1)
/// (PositiveReparam).
Lnn lnn_init(const NetworkShape& shape, LastLayerMode mode, std::uint64_t seed);

/// Layer values of one forward pass. layer_values[0] is the input and
/// layer_values[k+1] holds the scalar V(x).
struct EvalTrace {
  std::vector<Eigen::VectorXd> layer_values;
  std::vector<Eigen::VectorXd> pre_activations;  // W_i z_{i-1}, i = 1..k
};

struct ForwardResult {
  double value;
  EvalTrace trace;
};

ForwardResult lnn_forward(const Lnn& net, const Eigen::Ref<const Eigen::VectorXd>& x);
double lnn_value(const Lnn& net, const Eigen::Ref<const Eigen::VectorXd>& x);

/// grad V = W_{k+1} prod_i diag(s_i'(W_i z_{i-1})) W_i, accumulated
/// right-to-left from the stored pre-activations.
Eigen::VectorXd lnn_gradient(const Lnn& net, const EvalTrace& trace);

/// V-dot(x) = grad V(x) . f(x).
double lnn_vdot(const Lnn& net, const VectorField& f, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Integer power by repeated multiplication.
inline double ipow(double base, unsigned exponent) {
  double result = 1.0;
  while (exponent > 0) {
    if (exponent & 1u) result *= base;
    exponent >>= 1u;
    if (exponent > 0) base *= base;
  }
  return result;
}

/// Text checkpoint; doubles are written in shortest round-trip form so a
/// write/read cycle is bit-exact.
void write_checkpoint(std::ostream& out, const Lnn& net);
Lnn read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Lnn& net);
Lnn load_checkpoint(const std::string& path);

}  // namespace lnn
