#include "lnn/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include "lnn/logging.hpp"
#include "lnn/network.hpp"
#include "lnn/solver_process.hpp"

namespace lnn {

void SolverConfig::validate() const {
  if (executable.empty()) throw std::invalid_argument("solver: executable path is empty");
  if (!(time_limit_seconds > 0)) throw std::invalid_argument("solver: time limit must be positive");
}

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kValid: return "valid";
    case VerdictKind::kFalsified: return "falsified";
    case VerdictKind::kUnknown: return "unknown";
  }
  return "?";
}

QueryResult run_query(const FalsificationQuery& query, const SolverConfig& cfg) {
  cfg.validate();
  QueryResult result;
  result.which = query.which;
  const ProcessResult proc = run_process(cfg.executable, cfg.args, emit_smtlib(query), cfg.time_limit_seconds);
  result.seconds = proc.seconds;
  result.solver_output = proc.stdout_text;
  if (!proc.stderr_text.empty()) result.solver_output += "\n[stderr]\n" + proc.stderr_text;
  if (!proc.launched) {
    result.reason = "solver-error";
    return result;
  }
  if (proc.timed_out) {
    result.reason = "timeout";
    return result;
  }
  const ParsedSolverOutput parsed = parse_solver_output(proc.stdout_text, query.variables);
  switch (parsed.answer) {
    case SolverAnswer::kUnsat:
      result.status = QueryStatus::kUnsat;
      break;
    case SolverAnswer::kSat:
      result.status = QueryStatus::kSat;
      result.model = parsed.model;
      result.approximate_model = parsed.approximate;
      break;
    case SolverAnswer::kUnknown:
      result.reason = "solver-unknown";
      break;
    case SolverAnswer::kError:
      result.reason = "solver-error";
      result.solver_output = parsed.error + "\n" + result.solver_output;
      break;
  }
  return result;
}

bool validate_counterexample(const CertificateCandidate& cand, std::span<const Rational> c, QueryKind which,
                             const DomainSpec& domain) {
  if (c.size() != cand.dimension()) return false;
  if (std::all_of(c.begin(), c.end(), [](const Rational& v) { return v == 0; })) return false;
  if (!domain.contains(c)) return false;
  return which == QueryKind::kPhi1 ? cand.vdot(c) >= 0 : cand.v(c) <= 0;
}

std::vector<Eigen::VectorXd> augment_counterexample(const Eigen::Ref<const Eigen::VectorXd>& c,
                                                    const DomainSpec& domain, std::size_t count,
                                                    double radius_fraction, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out{c};
  if (count == 0) return out;
  const double radius = radius_fraction * domain.gamma.get_d();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const auto n = c.size();
  std::size_t attempts = 0;
  const std::size_t max_attempts = 100 * count;
  while (out.size() < count + 1 && attempts < max_attempts) {
    ++attempts;
    Eigen::VectorXd dir(n);
    for (Eigen::Index i = 0; i < n; ++i) dir[i] = normal(rng);
    const double norm = dir.norm();
    if (norm == 0) continue;
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
    Eigen::VectorXd p = c + dir * (r / norm);
    if ((p.array() == 0.0).all() || !domain.contains(p)) continue;
    out.push_back(std::move(p));
  }
  if (out.size() < count + 1) {
    warn("augment_counterexample: accepted only " + std::to_string(out.size() - 1) + " of " +
         std::to_string(count) + " neighbourhood points");
  }
  return out;
}

namespace {

/// Flat double-coefficient polynomial for tight evaluation loops.
class FlatPolynomial {
 public:
  explicit FlatPolynomial(const Polynomial& p) : dim_(p.dimension()), min_degree_(p.min_degree()) {
    for (const auto& [m, c] : p.terms()) {
      coeffs_.push_back(c.get_d());
      exps_.insert(exps_.end(), m.exponents().begin(), m.exponents().end());
    }
  }

  double operator()(const double* x) const {
    double sum = 0;
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
      double term = coeffs_[t];
      const unsigned* e = &exps_[t * dim_];
      for (std::size_t i = 0; i < dim_; ++i) {
        if (e[i]) term *= ipow(x[i], e[i]);
      }
      sum += term;
    }
    return sum;
  }

  unsigned min_degree() const { return min_degree_; }

 private:
  std::size_t dim_;
  unsigned min_degree_;
  std::vector<double> coeffs_;
  std::vector<unsigned> exps_;
};

enum class Target { kEither, kPhi1, kPhi2 };

class Falsifier {
 public:
  Falsifier(const CertificateCandidate& cand, const DomainSpec& domain, Target target, std::uint64_t seed)
      : cand_(cand), domain_(domain), target_(target), v_(cand.v), vdot_(cand.vdot), rng_(seed),
        gamma_(domain.gamma.get_d()) {}

  // Positive iff the float point violates the targeted condition; scaled by
  // the lowest degree so the origin is not an attractor.
  double score(const Eigen::VectorXd& x) const {
    const double r = x.norm();
    if (r == 0) return -std::numeric_limits<double>::infinity();
    double s = -std::numeric_limits<double>::infinity();
    if (target_ != Target::kPhi2) s = std::max(s, vdot_(x.data()) / ipow(r, vdot_.min_degree()));
    if (target_ != Target::kPhi1) s = std::max(s, -v_(x.data()) / ipow(r, v_.min_degree()));
    return std::isnan(s) ? -std::numeric_limits<double>::infinity() : s;
  }

  std::optional<Counterexample> try_validate(const Eigen::VectorXd& x, const char* source) const {
    std::vector<Rational> exact;
    for (Eigen::Index i = 0; i < x.size(); ++i) exact.push_back(rational_from_double(x[i]));
    for (QueryKind which : {QueryKind::kPhi1, QueryKind::kPhi2}) {
      if (target_ == Target::kPhi1 && which != QueryKind::kPhi1) continue;
      if (target_ == Target::kPhi2 && which != QueryKind::kPhi2) continue;
      if (validate_counterexample(cand_, exact, which, domain_)) return Counterexample{which, exact, source};
    }
    return std::nullopt;
  }

  Eigen::VectorXd project(Eigen::VectorXd y) const {
    if (domain_.orthant()) y = y.cwiseMax(0.0);
    const double r = y.norm();
    if (r > gamma_) y *= gamma_ / r * (1 - 1e-15);
    if (domain_.kind == DomainKind::kOrthantAnnulus) {
      const double rho = domain_.rho.get_d();
      if (r > 0 && y.norm() < rho) y *= rho / y.norm() * (1 + 1e-15);
    }
    return y;
  }

  // Greedy random-perturbation ascent from `x`.
  std::optional<Counterexample> climb(Eigen::VectorXd x, double step, std::size_t& budget, const char* source) {
    std::normal_distribution<double> normal;
    double s = score(x);
    int failures = 0;
    const double min_step = 1e-12 * gamma_;
    while (budget > 0 && step > min_step) {
      if (s >= 0) {
        if (auto c = try_validate(x, source)) return c;
      }
      Eigen::VectorXd y(x.size());
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = x[i] + step * normal(rng_);
      y = project(std::move(y));
      --budget;
      const double sy = score(y);
      if (sy > s) {
        x = std::move(y);
        s = sy;
        failures = 0;
        step *= 1.5;
      } else if (++failures >= 8) {
        step *= 0.5;
        failures = 0;
      }
    }
    if (s >= 0) return try_validate(x, source);
    return std::nullopt;
  }

  std::optional<Counterexample> search(std::size_t budget) {
    if (budget == 0) return std::nullopt;
    const std::size_t n = cand_.dimension();
    std::size_t random_budget = budget / 2;
    budget -= random_budget;
    constexpr std::size_t kStarts = 6;
    std::vector<std::pair<double, Eigen::VectorXd>> best;
    for (; random_budget > 0; --random_budget) {
      Eigen::VectorXd x = sample_domain(domain_, n, rng_);
      const double s = score(x);
      if (s >= 0) {
        if (auto c = try_validate(x, "fallback")) return c;
      }
      if (best.size() < kStarts || s > best.back().first) {
        best.emplace_back(s, std::move(x));
        std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        if (best.size() > kStarts) best.pop_back();
      }
    }
    for (auto& start : best) {
      if (budget == 0) break;
      std::size_t share = std::max<std::size_t>(1, budget / kStarts);
      share = std::min(share, budget);
      budget -= share;
      if (auto c = climb(start.second, 0.05 * gamma_, share, "fallback")) return c;
      budget += share;
    }
    return std::nullopt;
  }

 private:
  const CertificateCandidate& cand_;
  const DomainSpec& domain_;
  Target target_;
  FlatPolynomial v_;
  FlatPolynomial vdot_;
  std::mt19937_64 rng_;
  double gamma_;
};

}  // namespace

std::optional<Counterexample> fallback_falsify(const CertificateCandidate& cand, const DomainSpec& domain,
                                               std::size_t budget, std::uint64_t seed) {
  Falsifier f(cand, domain, Target::kEither, seed);
  return f.search(budget);
}

std::optional<Counterexample> local_falsify(const CertificateCandidate& cand, const DomainSpec& domain,
                                            const Eigen::Ref<const Eigen::VectorXd>& start, QueryKind which,
                                            std::size_t budget, std::uint64_t seed) {
  Falsifier f(cand, domain, which == QueryKind::kPhi1 ? Target::kPhi1 : Target::kPhi2, seed);
  Eigen::VectorXd x = f.project(start);
  if (auto c = f.try_validate(x, "smt-approx")) return c;
  const double step = 1e-9 * std::max(1.0, x.norm());
  return f.climb(std::move(x), step, budget, "smt-approx");
}

VerifierVerdict verify(const CertificateCandidate& cand, const DomainSpec& domain, const SolverConfig& cfg,
                       const VerifyOptions& options) {
  auto [phi1, phi2] = build_queries(cand, domain);
  if (options.on_script) {
    options.on_script(QueryKind::kPhi1, emit_smtlib(phi1));
    options.on_script(QueryKind::kPhi2, emit_smtlib(phi2));
  }
  VerifierVerdict verdict;
  if (options.parallel) {
    auto second = std::async(std::launch::async, [&] { return run_query(phi2, cfg); });
    verdict.queries.push_back(run_query(phi1, cfg));
    verdict.queries.push_back(second.get());
  } else {
    verdict.queries.push_back(run_query(phi1, cfg));
    verdict.queries.push_back(run_query(phi2, cfg));
  }

  std::string unknown_reason, unknown_output;
  for (const QueryResult& q : verdict.queries) {
    if (q.status == QueryStatus::kUnsat) continue;
    if (q.status == QueryStatus::kSat && q.model) {
      if (validate_counterexample(cand, *q.model, q.which, domain)) {
        verdict.counterexamples.push_back({q.which, *q.model, "smt"});
        continue;
      }
      Eigen::VectorXd start(static_cast<Eigen::Index>(q.model->size()));
      for (std::size_t i = 0; i < q.model->size(); ++i) start[static_cast<Eigen::Index>(i)] = (*q.model)[i].get_d();
      if (auto c = local_falsify(cand, domain, start, q.which, 20000, options.seed)) {
        verdict.counterexamples.push_back(std::move(*c));
        continue;
      }
      if (unknown_reason.empty()) {
        unknown_reason = "solver-error";
        unknown_output = to_string(q.which) + ": model failed exact validation\n" + q.solver_output;
      }
      continue;
    }
    if (unknown_reason.empty()) {
      unknown_reason = q.reason.empty() ? "solver-error" : q.reason;
      unknown_output = to_string(q.which) + ": " + q.solver_output;
    }
  }
  if (!verdict.counterexamples.empty()) {
    verdict.kind = VerdictKind::kFalsified;
  } else if (unknown_reason.empty()) {
    verdict.kind = VerdictKind::kValid;
  } else {
    verdict.kind = VerdictKind::kUnknown;
    verdict.reason = unknown_reason;
    verdict.diagnostics = unknown_output;
  }
  return verdict;
}

SampledCheck sampled_violation_check(const CertificateCandidate& cand, const DomainSpec& domain,
                                     std::size_t samples, std::uint64_t seed) {
  const FlatPolynomial v(cand.v), vdot(cand.vdot);
  std::mt19937_64 rng(seed);
  SampledCheck out;
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::VectorXd x = sample_domain(domain, cand.dimension(), rng);
    ++out.samples;
    if (!(vdot(x.data()) < 0.0 && v(x.data()) > 0.0)) {
      if (!out.first_violation) out.first_violation = x;
      ++out.violations;
    }
  }
  return out;
}

}  // namespace lnn
