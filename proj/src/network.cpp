#include "lnn/network.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lnn {

void NetworkShape::validate() const {
  if (input_dim == 0) throw std::invalid_argument("network: input dimension must be positive");
  if (hidden_widths.empty()) throw std::invalid_argument("network: at least one hidden layer is required");
  if (hidden_widths.size() != activation_degrees.size()) {
    throw std::invalid_argument("network: one activation degree per hidden layer is required");
  }
  for (auto w : hidden_widths) {
    if (w == 0) throw std::invalid_argument("network: hidden widths must be >= 1");
  }
  for (auto d : activation_degrees) {
    if (d < 2) throw std::invalid_argument("network: activation degrees must be >= 2");
  }
}

unsigned NetworkShape::total_degree() const {
  unsigned out = 1;
  for (auto d : activation_degrees) out *= d;
  return out;
}

std::string to_string(LastLayerMode mode) {
  switch (mode) {
    case LastLayerMode::kFree: return "free";
    case LastLayerMode::kFixedOnes: return "ones";
    case LastLayerMode::kPositiveReparam: return "positive";
  }
  return "?";
}

LastLayerMode parse_last_layer_mode(const std::string& text) {
  if (text == "free") return LastLayerMode::kFree;
  if (text == "ones") return LastLayerMode::kFixedOnes;
  if (text == "positive") return LastLayerMode::kPositiveReparam;
  throw std::invalid_argument("unknown last-layer mode '" + text + "' (free|ones|positive)");
}

double softplus(double theta) {
  const double value = theta > 30.0 ? theta : std::log1p(std::exp(theta));
  return value > 0.0 ? value : std::numeric_limits<double>::min();
}

double softplus_inverse(double weight) {
  if (!(weight > 0.0)) throw std::invalid_argument("softplus_inverse: weight must be positive");
  return weight > 30.0 ? weight : std::log(std::expm1(weight));
}

Lnn::Lnn(NetworkShape shape, LastLayerMode mode, std::vector<Eigen::MatrixXd> hidden_weights,
         Eigen::RowVectorXd output_parameters, std::uint64_t seed)
    : shape_(std::move(shape)),
      mode_(mode),
      hidden_(std::move(hidden_weights)),
      output_params_(std::move(output_parameters)),
      seed_(seed) {
  shape_.validate();
  if (hidden_.size() != shape_.depth()) throw std::invalid_argument("network: wrong number of weight matrices");
  for (std::size_t i = 0; i < hidden_.size(); ++i) {
    const auto rows = static_cast<Eigen::Index>(shape_.hidden_widths[i]);
    const auto cols = static_cast<Eigen::Index>(i == 0 ? shape_.input_dim : shape_.hidden_widths[i - 1]);
    if (hidden_[i].rows() != rows || hidden_[i].cols() != cols) {
      throw std::invalid_argument("network: weight matrix " + std::to_string(i + 1) + " has wrong shape");
    }
  }
  const auto last = static_cast<Eigen::Index>(shape_.hidden_widths.back());
  if (mode_ == LastLayerMode::kFixedOnes) output_params_ = Eigen::RowVectorXd::Ones(last);
  if (output_params_.size() != last) throw std::invalid_argument("network: output layer has wrong width");
  refresh_output();
}

void Lnn::set_hidden_weights(std::size_t layer, const Eigen::MatrixXd& w) {
  auto& target = hidden_.at(layer);
  if (w.rows() != target.rows() || w.cols() != target.cols()) {
    throw std::invalid_argument("set_hidden_weights: shape mismatch");
  }
  target = w;
}

void Lnn::set_output_parameters(const Eigen::RowVectorXd& params) {
  if (params.size() != output_params_.size()) throw std::invalid_argument("set_output_parameters: size mismatch");
  if (mode_ == LastLayerMode::kFixedOnes) return;
  output_params_ = params;
  refresh_output();
}

void Lnn::refresh_output() {
  switch (mode_) {
    case LastLayerMode::kFree:
      output_weights_ = output_params_;
      break;
    case LastLayerMode::kFixedOnes:
      output_weights_ = Eigen::RowVectorXd::Ones(output_params_.size());
      break;
    case LastLayerMode::kPositiveReparam:
      output_weights_ = output_params_.unaryExpr([](double t) { return softplus(t); });
      break;
  }
}

std::size_t Lnn::num_parameters() const {
  std::size_t n = 0;
  for (const auto& w : hidden_) n += static_cast<std::size_t>(w.size());
  if (mode_ != LastLayerMode::kFixedOnes) n += static_cast<std::size_t>(output_params_.size());
  return n;
}

bool operator==(const Lnn& a, const Lnn& b) {
  if (!(a.shape_ == b.shape_) || a.mode_ != b.mode_ || a.seed_ != b.seed_) return false;
  for (std::size_t i = 0; i < a.hidden_.size(); ++i) {
    if (a.hidden_[i] != b.hidden_[i]) return false;
  }
  return a.output_params_ == b.output_params_;
}

Lnn lnn_init(const NetworkShape& shape, LastLayerMode mode, std::uint64_t seed) {
  shape.validate();
  std::mt19937_64 rng(seed);
  std::vector<Eigen::MatrixXd> hidden;
  std::size_t fan_in = shape.input_dim;
  for (std::size_t width : shape.hidden_widths) {
    std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    Eigen::MatrixXd w(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    hidden.push_back(std::move(w));
    fan_in = width;
  }
  const auto last = static_cast<Eigen::Index>(shape.hidden_widths.back());
  Eigen::RowVectorXd out(last);
  switch (mode) {
    case LastLayerMode::kFree: {
      std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(last)));
      for (Eigen::Index i = 0; i < last; ++i) out[i] = dist(rng);
      break;
    }
    case LastLayerMode::kFixedOnes:
      out.setOnes();
      break;
    case LastLayerMode::kPositiveReparam:
      out.setConstant(softplus_inverse(1.0));
      break;
  }
  return Lnn(shape, mode, std::move(hidden), std::move(out), seed);
}

ForwardResult lnn_forward(const Lnn& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != net.shape().input_dim) {
    throw std::invalid_argument("lnn_forward: input has dimension " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(net.shape().input_dim));
  }
  EvalTrace trace;
  trace.layer_values.reserve(net.depth() + 2);
  trace.pre_activations.reserve(net.depth());
  trace.layer_values.emplace_back(x);
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const unsigned d = net.shape().activation_degrees[i];
    Eigen::VectorXd u = net.hidden_weights(i) * trace.layer_values.back();
    trace.layer_values.push_back(u.unaryExpr([d](double p) { return ipow(p, d); }));
    trace.pre_activations.push_back(std::move(u));
  }
  const double value = net.output_weights().dot(trace.layer_values.back());
  trace.layer_values.push_back(Eigen::VectorXd::Constant(1, value));
  return ForwardResult{value, std::move(trace)};
}

double lnn_value(const Lnn& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return lnn_forward(net, x).value;
}

Eigen::VectorXd lnn_gradient(const Lnn& net, const EvalTrace& trace) {
  if (trace.pre_activations.size() != net.depth() || trace.layer_values.size() != net.depth() + 2) {
    throw std::invalid_argument("lnn_gradient: trace does not match network depth");
  }
  Eigen::RowVectorXd g = net.output_weights();
  for (std::size_t i = net.depth(); i-- > 0;) {
    const Eigen::VectorXd& u = trace.pre_activations[i];
    if (u.size() != g.size() || net.hidden_weights(i).rows() != u.size()) {
      throw std::invalid_argument("lnn_gradient: trace does not match network shape");
    }
    const unsigned d = net.shape().activation_degrees[i];
    const Eigen::RowVectorXd slope = u.unaryExpr([d](double p) { return d * ipow(p, d - 1); }).transpose();
    g = g.cwiseProduct(slope) * net.hidden_weights(i);
  }
  return g.transpose();
}

double lnn_vdot(const Lnn& net, const VectorField& f, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (f.dimension() != net.shape().input_dim) throw std::invalid_argument("lnn_vdot: dimension mismatch");
  const ForwardResult fwd = lnn_forward(net, x);
  return lnn_gradient(net, fwd.trace).dot(f(x));
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("checkpoint: malformed number '" + s + "'");
  }
  return v;
}

std::string expect_key(std::istream& in, const std::string& key) {
  std::string word;
  if (!(in >> word) || word != key) {
    throw std::invalid_argument("checkpoint: expected '" + key + "', found '" + word + "'");
  }
  std::string rest;
  std::getline(in, rest);
  return rest;
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::istringstream in(text);
  std::vector<T> out;
  for (T v; in >> v;) out.push_back(v);
  if (!in.eof()) throw std::invalid_argument("checkpoint: malformed value list '" + text + "'");
  return out;
}

template <typename T>
T parse_scalar(const std::string& text, const char* key) {
  const auto values = parse_list<T>(text);
  if (values.size() != 1) throw std::invalid_argument(std::string("checkpoint: malformed ") + key);
  return values[0];
}

void write_row(std::ostream& out, const auto& row) {
  for (Eigen::Index c = 0; c < row.size(); ++c) out << (c ? " " : "") << format_double(row[c]);
  out << '\n';
}

Eigen::RowVectorXd read_row(std::istream& in, Eigen::Index cols) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("checkpoint: truncated weight matrix");
  const auto words = parse_list<std::string>(line);
  if (static_cast<Eigen::Index>(words.size()) != cols) throw std::invalid_argument("checkpoint: wrong row length");
  Eigen::RowVectorXd row(cols);
  for (Eigen::Index c = 0; c < cols; ++c) row[c] = parse_double(words[static_cast<std::size_t>(c)]);
  return row;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Lnn& net) {
  const auto& shape = net.shape();
  out << "lnn-checkpoint 1\n";
  out << "input_dim " << shape.input_dim << '\n';
  out << "hidden";
  for (auto w : shape.hidden_widths) out << ' ' << w;
  out << "\ndegrees";
  for (auto d : shape.activation_degrees) out << ' ' << d;
  out << "\nlast_layer " << to_string(net.last_layer_mode()) << '\n';
  out << "seed " << net.seed() << '\n';
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const auto& w = net.hidden_weights(i);
    out << "W" << (i + 1) << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) write_row(out, w.row(r));
  }
  out << "output " << net.output_parameters().size() << '\n';
  write_row(out, net.output_parameters());
}

Lnn read_checkpoint(std::istream& in) {
  if (expect_key(in, "lnn-checkpoint") != " 1") throw std::invalid_argument("checkpoint: unsupported version");
  NetworkShape shape;
  shape.input_dim = parse_scalar<std::size_t>(expect_key(in, "input_dim"), "input_dim");
  shape.hidden_widths = parse_list<std::size_t>(expect_key(in, "hidden"));
  shape.activation_degrees = parse_list<unsigned>(expect_key(in, "degrees"));
  shape.validate();
  const auto words = parse_list<std::string>(expect_key(in, "last_layer"));
  if (words.size() != 1) throw std::invalid_argument("checkpoint: malformed last_layer");
  const LastLayerMode mode = parse_last_layer_mode(words[0]);
  const std::uint64_t seed = parse_scalar<std::uint64_t>(expect_key(in, "seed"), "seed");
  std::vector<Eigen::MatrixXd> hidden;
  for (std::size_t i = 0; i < shape.depth(); ++i) {
    const auto dims = parse_list<Eigen::Index>(expect_key(in, "W" + std::to_string(i + 1)));
    if (dims.size() != 2) throw std::invalid_argument("checkpoint: malformed matrix header");
    Eigen::MatrixXd w(dims[0], dims[1]);
    for (Eigen::Index r = 0; r < dims[0]; ++r) w.row(r) = read_row(in, dims[1]);
    hidden.push_back(std::move(w));
  }
  const auto out_dims = parse_list<Eigen::Index>(expect_key(in, "output"));
  if (out_dims.size() != 1) throw std::invalid_argument("checkpoint: malformed output header");
  Eigen::RowVectorXd out = read_row(in, out_dims[0]);
  return Lnn(shape, mode, std::move(hidden), std::move(out), seed);
}

void save_checkpoint(const std::string& path, const Lnn& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, net);
}

Lnn load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace lnn
