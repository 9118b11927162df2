#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lnn/dynamics.hpp"
#include "lnn/smtlib.hpp"
#include "lnn/translation.hpp"

namespace lnn {

struct SolverConfig {
  std::string executable = "z3";
  std::vector<std::string> args = {"-smt2", "-in"};
  double time_limit_seconds = 30.0;

  void validate() const;
};

enum class QueryStatus { kSat, kUnsat, kUnknown };

struct QueryResult {
  QueryKind which = QueryKind::kPhi1;
  QueryStatus status = QueryStatus::kUnknown;
  /// Exact satisfying assignment (sat only).
  std::optional<std::vector<Rational>> model;
  bool approximate_model = false;
  /// "timeout", "solver-unknown" or "solver-error" for unknown results.
  std::string reason;
  std::string solver_output;
  double seconds = 0;
};

/// Writes the script to the solver's stdin and interprets the answer.
QueryResult run_query(const FalsificationQuery& query, const SolverConfig& cfg);

struct Counterexample {
  QueryKind which;
  std::vector<Rational> point;
  /// "smt", "smt-approx" (algebraic witness rounded, then searched locally)
  /// or "fallback".
  std::string source;
};

/// Exact re-check: c in D, c != 0, and vdot(c) >= 0 (phi1) or V(c) <= 0 (phi2).
bool validate_counterexample(const CertificateCandidate& cand, std::span<const Rational> c, QueryKind which,
                             const DomainSpec& domain);

/// `c` followed by up to `count` points drawn uniformly from the ball of
/// radius radius_fraction * gamma around c, kept only if in D and nonzero.
std::vector<Eigen::VectorXd> augment_counterexample(const Eigen::Ref<const Eigen::VectorXd>& c,
                                                    const DomainSpec& domain, std::size_t count,
                                                    double radius_fraction, std::uint64_t seed);

/// Float search (random sampling, then hill climbing on a degree-normalized
/// max(vdot, -V)). Only exactly validated points are returned; `nullopt`
/// proves nothing.
std::optional<Counterexample> fallback_falsify(const CertificateCandidate& cand, const DomainSpec& domain,
                                               std::size_t budget, std::uint64_t seed);

/// Same climb, started from `start`; used when a solver witness only
/// approximates an algebraic point.
std::optional<Counterexample> local_falsify(const CertificateCandidate& cand, const DomainSpec& domain,
                                            const Eigen::Ref<const Eigen::VectorXd>& start, QueryKind which,
                                            std::size_t budget, std::uint64_t seed);

enum class VerdictKind { kValid, kFalsified, kUnknown };

std::string to_string(VerdictKind kind);

struct VerifierVerdict {
  VerdictKind kind = VerdictKind::kUnknown;
  std::vector<Counterexample> counterexamples;
  std::string reason;       // for kUnknown
  std::string diagnostics;  // solver output for kUnknown
  std::vector<QueryResult> queries;
};

struct VerifyOptions {
  bool parallel = true;
  std::uint64_t seed = 0;
  /// Called with each emitted script before it is sent.
  std::function<void(QueryKind, const std::string&)> on_script;
};

/// Runs phi1 and phi2. Valid only if both are unsat; all validated witnesses
/// are returned when either is sat.
VerifierVerdict verify(const CertificateCandidate& cand, const DomainSpec& domain, const SolverConfig& cfg,
                       const VerifyOptions& options = {});

struct SampledCheck {
  std::size_t samples = 0;
  std::size_t violations = 0;
  std::optional<Eigen::VectorXd> first_violation;
};

/// Uniform samples in D; counts float points (origin excluded) where
/// vdot < 0 and V > 0 fail.
SampledCheck sampled_violation_check(const CertificateCandidate& cand, const DomainSpec& domain,
                                     std::size_t samples, std::uint64_t seed);

}  // namespace lnn
