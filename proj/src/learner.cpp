#include "lnn/learner.hpp"

#include <cmath>
#include <sstream>

#include "lnn/logging.hpp"

namespace lnn {

std::string to_string(SampleOrigin origin) {
  switch (origin) {
    case SampleOrigin::kInitial: return "initial";
    case SampleOrigin::kCounterexample: return "counterexample";
    case SampleOrigin::kNeighborhood: return "neighborhood";
  }
  return "?";
}

SampleSet::SampleSet(DomainSpec domain, std::size_t dimension)
    : domain_(std::move(domain)), dimension_(dimension), points_(static_cast<Eigen::Index>(dimension), 0) {
  domain_.validate();
  if (dimension == 0) throw std::invalid_argument("sample set dimension must be positive");
}

bool SampleSet::try_insert(const Eigen::Ref<const Eigen::VectorXd>& point, SampleOrigin origin) {
  if (static_cast<std::size_t>(point.size()) != dimension_) return false;
  if (!point.allFinite() || (point.array() == 0.0).all()) return false;
  if (!domain_.contains(point)) return false;
  points_.conservativeResize(Eigen::NoChange, points_.cols() + 1);
  points_.col(points_.cols() - 1) = point;
  origins_.push_back(origin);
  return true;
}

void SampleSet::insert(const Eigen::Ref<const Eigen::VectorXd>& point, SampleOrigin origin) {
  if (!try_insert(point, origin)) {
    std::ostringstream msg;
    msg << "sample (" << point.transpose() << ") rejected: must lie in " << domain_.describe()
        << " and differ from the origin";
    throw std::invalid_argument(msg.str());
  }
}

std::size_t SampleSet::count(SampleOrigin origin) const {
  std::size_t n = 0;
  for (auto o : origins_) n += (o == origin);
  return n;
}

std::string format_epoch_record(const EpochRecord& record) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch=" << record.epoch << " loss=" << record.mean_loss << " violations=" << record.violations;
  return out.str();
}

void LearnerConfig::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("learner: epsilon must be positive");
  if (slope && !(*slope > 0)) throw std::invalid_argument("learner: slope must be positive");
  if (!(learning_rate > 0)) throw std::invalid_argument("learner: learning rate must be positive");
}

SampleLoss sample_loss(const Lnn& net, const VectorField& f, const Eigen::Ref<const Eigen::VectorXd>& s,
                       double epsilon, double slope) {
  const ForwardResult fwd = lnn_forward(net, s);
  const double vdot = lnn_gradient(net, fwd.trace).dot(f(s));
  const double decrease = leaky_relu(vdot + epsilon, slope);
  const double positive = leaky_relu(-fwd.value + epsilon, slope);
  return SampleLoss{decrease + positive, decrease, positive};
}

SamplePartition classify_samples(const Lnn& net, const VectorField& f, const SampleSet& samples) {
  SamplePartition out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Eigen::VectorXd s = samples.point(i);
    const ForwardResult fwd = lnn_forward(net, s);
    const double vdot = lnn_gradient(net, fwd.trace).dot(f(s));
    if (vdot < 0.0 && fwd.value > 0.0) {
      out.satisfied.push_back(i);
    } else {
      out.violating.push_back(i);
    }
  }
  return out;
}

double auto_slope(const SampleSet& samples, const VectorField& f) {
  if (samples.empty()) throw std::invalid_argument("auto_slope: empty sample set");
  Eigen::Index largest = 0;
  samples.matrix().colwise().squaredNorm().maxCoeff(&largest);
  const double magnitude = f(samples.matrix().col(largest)).norm();
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) {
    warn("auto_slope: f vanishes at the largest sample; using slope 1");
    return 1.0;
  }
  return std::pow(10.0, std::round(-std::log10(magnitude)));
}

namespace {

struct BatchPass {
  std::vector<Eigen::MatrixXd> z;   // z[0] = X, z[i] = s_i(U_i)
  std::vector<Eigen::MatrixXd> dz;  // tangent along f
  std::vector<Eigen::MatrixXd> u;
  std::vector<Eigen::MatrixXd> du;
  Eigen::RowVectorXd value;
  Eigen::RowVectorXd vdot;
};

BatchPass forward_batch(const Lnn& net, const Eigen::Ref<const Eigen::MatrixXd>& points,
                        const Eigen::Ref<const Eigen::MatrixXd>& field_values) {
  BatchPass pass;
  pass.z.push_back(points);
  pass.dz.push_back(field_values);
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const unsigned d = net.shape().activation_degrees[i];
    const Eigen::MatrixXd& w = net.hidden_weights(i);
    pass.u.push_back(w * pass.z.back());
    pass.du.push_back(w * pass.dz.back());
    const Eigen::MatrixXd& u = pass.u.back();
    pass.z.push_back(u.unaryExpr([d](double p) { return ipow(p, d); }));
    pass.dz.push_back(u.unaryExpr([d](double p) { return d * ipow(p, d - 1); }).cwiseProduct(pass.du.back()));
  }
  pass.value = net.output_weights() * pass.z.back();
  pass.vdot = net.output_weights() * pass.dz.back();
  return pass;
}

// Slope of the leaky ReLU; the kink takes the negative-branch slope.
inline double leaky_slope(double p, double a) { return p > 0.0 ? 1.0 : a; }

}  // namespace

LossGradient loss_gradient(const Lnn& net, const Eigen::Ref<const Eigen::MatrixXd>& points,
                           const Eigen::Ref<const Eigen::MatrixXd>& field_values, double epsilon,
                           double slope) {
  if (points.cols() == 0) throw std::invalid_argument("loss_gradient: empty batch");
  const BatchPass pass = forward_batch(net, points, field_values);
  const Eigen::Index n = points.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGradient out;
  Eigen::RowVectorXd g_vdot(n), g_value(n);
  double total = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double p1 = pass.vdot[j] + epsilon;
    const double p2 = -pass.value[j] + epsilon;
    total += leaky_relu(p1, slope) + leaky_relu(p2, slope);
    out.violations += (p1 > 0.0 || p2 > 0.0);
    g_vdot[j] = leaky_slope(p1, slope) * inv_n;
    g_value[j] = -leaky_slope(p2, slope) * inv_n;
  }
  out.mean_loss = total * inv_n;

  const Eigen::RowVectorXd& c = net.output_weights();
  const Eigen::RowVectorXd grad_c =
      (pass.z.back() * g_value.transpose() + pass.dz.back() * g_vdot.transpose()).transpose();
  switch (net.last_layer_mode()) {
    case LastLayerMode::kFree:
      out.output = grad_c;
      break;
    case LastLayerMode::kFixedOnes:
      out.output = Eigen::RowVectorXd::Zero(c.size());
      break;
    case LastLayerMode::kPositiveReparam: {
      const Eigen::RowVectorXd sig =
          net.output_parameters().unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
      out.output = grad_c.cwiseProduct(sig);
      break;
    }
  }

  Eigen::MatrixXd bar_z = c.transpose() * g_value;
  Eigen::MatrixXd bar_dz = c.transpose() * g_vdot;
  out.hidden.resize(net.depth());
  for (std::size_t i = net.depth(); i-- > 0;) {
    const unsigned d = net.shape().activation_degrees[i];
    const Eigen::MatrixXd& u = pass.u[i];
    const Eigen::MatrixXd s1 = u.unaryExpr([d](double p) { return d * ipow(p, d - 1); });
    const Eigen::MatrixXd s2 = u.unaryExpr([d](double p) { return d * (d - 1) * ipow(p, d - 2); });
    const Eigen::MatrixXd bar_u = bar_z.cwiseProduct(s1) + bar_dz.cwiseProduct(s2).cwiseProduct(pass.du[i]);
    const Eigen::MatrixXd bar_du = bar_dz.cwiseProduct(s1);
    out.hidden[i] = bar_u * pass.z[i].transpose() + bar_du * pass.dz[i].transpose();
    if (i > 0) {
      const Eigen::MatrixXd& w = net.hidden_weights(i);
      bar_z = w.transpose() * bar_u;
      bar_dz = w.transpose() * bar_du;
    }
  }
  return out;
}

namespace {

struct AdamState {
  explicit AdamState(const Eigen::MatrixXd& like)
      : m(Eigen::MatrixXd::Zero(like.rows(), like.cols())), v(Eigen::MatrixXd::Zero(like.rows(), like.cols())) {}

  void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, double lr, std::size_t t) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-12;
    m = kBeta1 * m + (1 - kBeta1) * grad;
    v = kBeta2 * v + (1 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1 - std::pow(kBeta2, static_cast<double>(t));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }

  Eigen::MatrixXd m, v;
};

[[noreturn]] void report_non_finite(const Lnn& net, const VectorField& f, const SampleSet& samples,
                                    std::size_t epoch, double epsilon, double slope) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Eigen::VectorXd s = samples.point(i);
    if (!std::isfinite(sample_loss(net, f, s, epsilon, slope).total)) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch << ": non-finite loss at sample (" << s.transpose() << ")";
      throw TrainingError(msg.str(), epoch, s);
    }
  }
  throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ": non-finite gradient", epoch,
                      Eigen::VectorXd());
}

}  // namespace

TrainResult train(const Lnn& initial, const VectorField& f, const SampleSet& samples, const LearnerConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw std::invalid_argument("train: empty sample set");
  if (f.dimension() != initial.shape().input_dim || samples.dimension() != f.dimension()) {
    throw std::invalid_argument("train: dimension mismatch");
  }
  TrainResult result{initial, 0, false, 0.0, cfg.slope ? *cfg.slope : auto_slope(samples, f)};
  if (cfg.max_epochs == 0) return result;

  Lnn& net = result.net;
  const Eigen::MatrixXd& points = samples.matrix();
  const Eigen::MatrixXd field_values = f.evaluate_batch(points);

  std::vector<Eigen::MatrixXd> hidden = net.hidden_weights();
  Eigen::MatrixXd output = net.output_parameters();
  std::vector<AdamState> hidden_state;
  for (const auto& w : hidden) hidden_state.emplace_back(w);
  AdamState output_state(output);
  const bool train_output = net.last_layer_mode() != LastLayerMode::kFixedOnes;

  for (std::size_t epoch = 0;; ++epoch) {
    const LossGradient grad = loss_gradient(net, points, field_values, cfg.epsilon, result.slope);
    if (!std::isfinite(grad.mean_loss)) report_non_finite(net, f, samples, epoch, cfg.epsilon, result.slope);
    result.mean_loss = grad.mean_loss;
    if (cfg.log) cfg.log(EpochRecord{epoch, grad.mean_loss, grad.violations});
    if (grad.violations == 0) {
      result.converged = true;
      break;
    }
    if (epoch == cfg.max_epochs) break;
    for (const auto& g : grad.hidden) {
      if (!g.allFinite()) report_non_finite(net, f, samples, epoch, cfg.epsilon, result.slope);
    }
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      hidden_state[i].step(hidden[i], grad.hidden[i], cfg.learning_rate, epoch + 1);
      net.set_hidden_weights(i, hidden[i]);
    }
    if (train_output) {
      output_state.step(output, grad.output, cfg.learning_rate, epoch + 1);
      net.set_output_parameters(output);
    }
    result.epochs = epoch + 1;
  }
  return result;
}

}  // namespace lnn
