#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lnn/dynamics.hpp"
#include "lnn/learner.hpp"
#include "lnn/network.hpp"
#include "lnn/translation.hpp"
#include "lnn/verifier.hpp"

namespace lnn {

struct CegisConfig {
  /// input_dim may be left 0; it is taken from the vector field.
  NetworkShape shape{0, {2}, {2}};
  LastLayerMode last_layer = LastLayerMode::kFixedOnes;
  LearnerConfig learner;
  SolverConfig solver;
  DomainSpec domain = DomainSpec::ball(100);
  std::size_t initial_samples = 500;
  std::size_t max_iterations = 100;
  std::size_t augmentation_count = 20;
  double radius_fraction = 0.05;
  /// Float evaluations spent by the pre-SMT falsifier; 0 disables it.
  std::size_t fallback_budget = 20000;
  unsigned degree_cap = kDefaultDegreeCap;
  bool parallel_queries = true;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

enum class CegisStatus { kVerified, kExhausted, kVerifierInconclusive };

std::string to_string(CegisStatus status);

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::size_t samples = 0;    // |S| the learner trained on
  std::size_t epochs = 0;
  bool learner_converged = false;
  double slope = 0;
  VerdictKind verdict = VerdictKind::kUnknown;
  std::string verdict_source;  // "fallback" or "smt"
  std::string reason;
  std::vector<Counterexample> counterexamples;
  Polynomial candidate_v;
  Polynomial candidate_vdot;
  double train_seconds = 0;
  double translate_seconds = 0;
  double falsify_seconds = 0;
  double verify_seconds = 0;
};

struct CegisOutcome {
  CegisStatus status = CegisStatus::kExhausted;
  std::optional<CertificateCandidate> certificate;
  std::size_t iterations = 0;
  std::string reason;
  std::string diagnostics;
  std::vector<IterationRecord> history;
  Lnn final_net;
  double total_seconds = 0;
};

struct CegisHooks {
  std::function<void(const IterationRecord&)> on_iteration;
  std::function<void(std::size_t iteration, QueryKind, const std::string& script)> on_script;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// `count` uniform points of D (origin excluded), deterministic in `seed`.
SampleSet initial_sampling(const DomainSpec& domain, std::size_t dimension, std::size_t count, std::uint64_t seed);

/// Learner/verifier loop: train (warm-started), expand exactly, try the
/// float falsifier, then both SMT queries. Counterexamples and their
/// neighbourhoods are added to S until a candidate is proven valid, the
/// verifier is inconclusive, or the iteration budget runs out.
CegisOutcome run_cegis(const VectorField& f, const CegisConfig& cfg, const CegisHooks& hooks = {});

/// Nearest double point that lies in D, or nullopt.
std::optional<Eigen::VectorXd> float_point_in_domain(std::span<const Rational> point, const DomainSpec& domain);

}  // namespace lnn
