#include "lnn/cegis.hpp"

#include <chrono>
#include <random>

#include "lnn/random.hpp"

namespace lnn {

void CegisConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("cegis: max_iterations must be >= 1");
  if (initial_samples < 1) throw std::invalid_argument("cegis: initial_samples must be >= 1");
  if (!(radius_fraction > 0)) throw std::invalid_argument("cegis: radius_fraction must be positive");
  domain.validate();
  learner.validate();
  solver.validate();
  NetworkShape s = shape;
  if (s.input_dim == 0) s.input_dim = 1;
  s.validate();
}

std::string to_string(CegisStatus status) {
  switch (status) {
    case CegisStatus::kVerified: return "verified";
    case CegisStatus::kExhausted: return "exhausted";
    case CegisStatus::kVerifierInconclusive: return "inconclusive";
  }
  return "?";
}

SampleSet initial_sampling(const DomainSpec& domain, std::size_t dimension, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("initial_sampling: count must be >= 1");
  SampleSet samples(domain, dimension);
  std::mt19937_64 rng(seed);
  while (samples.size() < count) {
    samples.try_insert(sample_domain(domain, dimension, rng), SampleOrigin::kInitial);
  }
  return samples;
}

std::optional<Eigen::VectorXd> float_point_in_domain(std::span<const Rational> point, const DomainSpec& domain) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(point.size()));
  for (std::size_t i = 0; i < point.size(); ++i) x[static_cast<Eigen::Index>(i)] = point[i].get_d();
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (!(x.array() == 0.0).all() && domain.contains(x)) return x;
    // Rounding can leave the point just outside the outer sphere.
    x *= 1.0 - 1e-15 * std::pow(10.0, attempt);
    if (domain.orthant()) x = x.cwiseMax(0.0);
  }
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

CegisOutcome run_cegis(const VectorField& f, const CegisConfig& input_cfg, const CegisHooks& hooks) {
  CegisConfig cfg = input_cfg;
  if (cfg.shape.input_dim == 0) cfg.shape.input_dim = f.dimension();
  cfg.validate();
  if (cfg.shape.input_dim != f.dimension()) throw std::invalid_argument("cegis: network input dimension != system dimension");

  const auto run_start = Clock::now();
  SampleSet samples =
      initial_sampling(cfg.domain, f.dimension(), cfg.initial_samples, derive_seed(cfg.seed, "samples"));
  Lnn net = lnn_init(cfg.shape, cfg.last_layer, derive_seed(cfg.seed, "init"));
  LearnerConfig learner = cfg.learner;
  if (hooks.on_epoch) learner.log = hooks.on_epoch;

  CegisOutcome outcome{CegisStatus::kExhausted, std::nullopt, 0, "", "", {}, net, 0};
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.samples = samples.size();
    outcome.iterations = it;

    auto t0 = Clock::now();
    TrainResult trained = [&] {
      try {
        return train(net, f, samples, learner);
      } catch (const TrainingError& e) {
        throw TrainingError("iteration " + std::to_string(it) + ": " + e.what(), e.epoch(), e.sample());
      }
    }();
    rec.train_seconds = seconds_since(t0);
    rec.epochs = trained.epochs;
    rec.learner_converged = trained.converged;
    rec.slope = trained.slope;
    net = std::move(trained.net);
    outcome.final_net = net;

    t0 = Clock::now();
    CertificateCandidate cand = make_candidate(net, f, cfg.degree_cap);
    rec.translate_seconds = seconds_since(t0);
    rec.candidate_v = cand.v;
    rec.candidate_vdot = cand.vdot;

    if (cfg.fallback_budget > 0) {
      t0 = Clock::now();
      auto cex = fallback_falsify(cand, cfg.domain, cfg.fallback_budget, derive_seed(cfg.seed, "fallback", it));
      rec.falsify_seconds = seconds_since(t0);
      if (cex) {
        rec.verdict = VerdictKind::kFalsified;
        rec.verdict_source = "fallback";
        rec.counterexamples.push_back(std::move(*cex));
      }
    }
    if (rec.counterexamples.empty()) {
      t0 = Clock::now();
      VerifyOptions options;
      options.parallel = cfg.parallel_queries;
      options.seed = derive_seed(cfg.seed, "local", it);
      if (hooks.on_script) {
        options.on_script = [&](QueryKind which, const std::string& script) { hooks.on_script(it, which, script); };
      }
      VerifierVerdict verdict = verify(cand, cfg.domain, cfg.solver, options);
      rec.verify_seconds = seconds_since(t0);
      rec.verdict = verdict.kind;
      rec.verdict_source = "smt";
      rec.reason = verdict.reason;
      rec.counterexamples = std::move(verdict.counterexamples);
      if (verdict.kind == VerdictKind::kValid) {
        outcome.status = CegisStatus::kVerified;
        outcome.certificate = std::move(cand);
      } else if (verdict.kind == VerdictKind::kUnknown) {
        outcome.status = CegisStatus::kVerifierInconclusive;
        outcome.reason = verdict.reason;
        outcome.diagnostics = verdict.diagnostics;
      }
    }

    if (rec.verdict == VerdictKind::kFalsified) {
      for (std::size_t k = 0; k < rec.counterexamples.size(); ++k) {
        const auto point = float_point_in_domain(rec.counterexamples[k].point, cfg.domain);
        if (!point) continue;
        const auto neighbourhood = augment_counterexample(*point, cfg.domain, cfg.augmentation_count,
                                                          cfg.radius_fraction,
                                                          derive_seed(cfg.seed, "augment", it * 16 + k));
        for (std::size_t j = 0; j < neighbourhood.size(); ++j) {
          samples.try_insert(neighbourhood[j], j == 0 ? SampleOrigin::kCounterexample : SampleOrigin::kNeighborhood);
        }
      }
    }
    if (hooks.on_iteration) hooks.on_iteration(rec);
    outcome.history.push_back(std::move(rec));
    if (outcome.status != CegisStatus::kExhausted) break;
  }
  outcome.total_seconds = seconds_since(run_start);
  return outcome;
}

}  // namespace lnn
