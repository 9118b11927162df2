#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lnn/dynamics.hpp"
#include "lnn/network.hpp"

namespace lnn {

enum class SampleOrigin { kInitial, kCounterexample, kNeighborhood };

std::string to_string(SampleOrigin origin);

/// Training points in D, never the origin. Membership is checked exactly on
/// insert.
class SampleSet {
 public:
  SampleSet(DomainSpec domain, std::size_t dimension);

  /// Throws std::invalid_argument if `point` is outside D or is the origin.
  void insert(const Eigen::Ref<const Eigen::VectorXd>& point, SampleOrigin origin);
  /// Returns false instead of throwing.
  bool try_insert(const Eigen::Ref<const Eigen::VectorXd>& point, SampleOrigin origin);

  std::size_t size() const { return origins_.size(); }
  bool empty() const { return origins_.empty(); }
  std::size_t dimension() const { return dimension_; }
  const DomainSpec& domain() const { return domain_; }
  Eigen::VectorXd point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  SampleOrigin origin(std::size_t i) const { return origins_.at(i); }
  /// n x N, one column per sample.
  const Eigen::MatrixXd& matrix() const { return points_; }
  std::size_t count(SampleOrigin origin) const;

 private:
  DomainSpec domain_;
  std::size_t dimension_;
  Eigen::MatrixXd points_;
  std::vector<SampleOrigin> origins_;
};

struct EpochRecord {
  std::size_t epoch;
  double mean_loss;
  std::size_t violations;
};

/// One structured-text line per epoch: `epoch=<e> loss=<mean> violations=<|S+|>`.
std::string format_epoch_record(const EpochRecord& record);

struct LearnerConfig {
  double epsilon = 0.01;
  /// Negative-branch slope of the leaky ReLU; nullopt selects auto_slope.
  std::optional<double> slope;
  double learning_rate = 0.05;
  std::size_t max_epochs = 2000;
  std::uint64_t seed = 0;
  std::function<void(const EpochRecord&)> log;

  void validate() const;
};

/// p for p >= 0, a*p otherwise.
inline double leaky_relu(double p, double a) { return p >= 0.0 ? p : a * p; }

struct SampleLoss {
  double total;
  double decrease;  // LR(vdot + eps, a)
  double positive;  // LR(-V + eps, a)
};

SampleLoss sample_loss(const Lnn& net, const VectorField& f, const Eigen::Ref<const Eigen::VectorXd>& s,
                       double epsilon, double slope);

/// Indices of S split into S- (vdot < 0 and V > 0) and S+ (everything else).
struct SamplePartition {
  std::vector<std::size_t> satisfied;
  std::vector<std::size_t> violating;
};

SamplePartition classify_samples(const Lnn& net, const VectorField& f, const SampleSet& samples);

/// 10^round(-log10 ||f(s_M)||) with s_M the sample of largest norm; falls back
/// to 1 (with a warning) when f(s_M) = 0.
double auto_slope(const SampleSet& samples, const VectorField& f);

/// Mean loss over a batch and its gradient with respect to every trainable
/// parameter (hidden matrices, then the output parameters).
struct LossGradient {
  double mean_loss = 0;
  std::size_t violations = 0;  // samples off the rewarded region
  std::vector<Eigen::MatrixXd> hidden;
  Eigen::RowVectorXd output;
};

LossGradient loss_gradient(const Lnn& net, const Eigen::Ref<const Eigen::MatrixXd>& points,
                           const Eigen::Ref<const Eigen::MatrixXd>& field_values, double epsilon,
                           double slope);

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& message, std::size_t epoch, Eigen::VectorXd sample)
      : std::runtime_error(message), epoch_(epoch), sample_(std::move(sample)) {}
  std::size_t epoch() const { return epoch_; }
  const Eigen::VectorXd& sample() const { return sample_; }

 private:
  std::size_t epoch_;
  Eigen::VectorXd sample_;
};

struct TrainResult {
  Lnn net;
  std::size_t epochs = 0;
  bool converged = false;  // every sample met both margins
  double mean_loss = 0;
  double slope = 0;
};

/// Full-batch descent with per-parameter adaptive step sizes on the mean
/// sample loss. Stops as soon as every sample has vdot <= -eps and V >= eps.
TrainResult train(const Lnn& net, const VectorField& f, const SampleSet& samples, const LearnerConfig& cfg);

}  // namespace lnn
