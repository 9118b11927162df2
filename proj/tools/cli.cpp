#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lnn/cegis.hpp"
#include "lnn/run_artifacts.hpp"

namespace lnn::cli {

namespace {

struct Target {
  std::string label;
  VectorField field;
  std::optional<DomainSpec> domain;
};

struct CommonOptions {
  std::string benchmark;
  std::string system;
  std::string gamma;
  std::string rho;
  bool orthant = false;
  bool no_orthant = false;
  std::string hidden = "2";
  std::string degrees = "2";
  std::string last_layer = "ones";
  double epsilon = 0.01;
  std::string slope = "auto";
  double lr = 0.05;
  std::size_t epochs = 2000;
  std::size_t initial_samples = 500;
  long long max_iterations = 100;
  std::size_t cex_points = 20;
  double radius_fraction = 0.05;
  std::size_t fallback_budget = 20000;
  unsigned degree_cap = kDefaultDegreeCap;
  std::string solver = "z3";
  std::vector<std::string> solver_args;
  double solver_timeout = 30;
  std::uint64_t seed = 0;
  std::string out;
  bool emit_smt = false;
  bool sequential_queries = false;
  bool verbose = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  if (text.empty()) return parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return parts;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> values;
  for (const auto& item : split(text, ',')) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      throw std::invalid_argument(what + ": '" + item + "' is not a non-negative integer");
    }
    values.push_back(v);
  }
  return values;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void add_target_options(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--benchmark", o.benchmark, "built-in system: parrilo, square2d, easy3d, hard3d");
  cmd.add_option("--system", o.system, "system file (.ode)");
}

void add_domain_options(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--gamma", o.gamma, "outer radius of D");
  cmd.add_option("--rho", o.rho, "inner radius (orthant annulus)");
  cmd.add_flag("--orthant", o.orthant, "restrict D to the positive orthant");
  cmd.add_flag("--no-orthant", o.no_orthant, "use the full ball");
}

void add_solver_options(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--solver", o.solver, "SMT solver executable");
  cmd.add_option("--solver-arg", o.solver_args, "solver argument (repeatable; default -smt2 -in)");
  cmd.add_option("--solver-timeout", o.solver_timeout, "per-query time limit [s]");
  cmd.add_flag("--sequential-queries", o.sequential_queries, "run phi1 and phi2 one after the other");
}

void add_run_options(CLI::App& cmd, CommonOptions& o) {
  add_target_options(cmd, o);
  add_domain_options(cmd, o);
  add_solver_options(cmd, o);
  cmd.add_option("--hidden", o.hidden, "hidden widths h1[,h2,...]");
  cmd.add_option("--degrees", o.degrees, "activation degrees d1[,...] (one value applies to all layers)");
  cmd.add_option("--last-layer", o.last_layer, "free|ones|positive");
  cmd.add_option("--epsilon", o.epsilon, "loss margin");
  cmd.add_option("--slope", o.slope, "leaky ReLU slope: auto or a number");
  cmd.add_option("--lr", o.lr, "Adam learning rate");
  cmd.add_option("--epochs", o.epochs, "epochs per training round");
  cmd.add_option("--initial-samples", o.initial_samples, "initial |S|");
  cmd.add_option("--max-iterations", o.max_iterations, "CEGIS iteration budget");
  cmd.add_option("--cex-points", o.cex_points, "neighbours injected per counterexample");
  cmd.add_option("--cex-radius", o.radius_fraction, "neighbourhood radius as a fraction of gamma");
  cmd.add_option("--fallback-budget", o.fallback_budget, "float falsifier evaluations per round (0 disables)");
  cmd.add_option("--degree-cap", o.degree_cap, "largest total degree of V");
  cmd.add_option("--seed", o.seed, "master seed");
  cmd.add_option("--out", o.out, "artifact directory");
  cmd.add_flag("--emit-smt", o.emit_smt, "write every SMT script to the artifact directory");
  cmd.add_flag("--verbose", o.verbose, "print per-epoch training records");
}

Target resolve_target(const CommonOptions& o) {
  if (o.benchmark.empty() == o.system.empty()) throw std::invalid_argument("give exactly one of --benchmark or --system");
  if (!o.benchmark.empty()) {
    const Benchmark& b = benchmark(o.benchmark);
    return Target{b.id, b.field, b.default_domain};
  }
  SystemDefinition def = load_system_file(o.system);
  return Target{o.system, std::move(def.field), def.domain};
}

DomainSpec resolve_domain(const CommonOptions& o, const std::optional<DomainSpec>& base) {
  if (o.orthant && o.no_orthant) throw std::invalid_argument("--orthant and --no-orthant are exclusive");
  if (!base && o.gamma.empty()) throw std::invalid_argument("the system defines no domain; pass --gamma");
  const Rational gamma = o.gamma.empty() ? base->gamma : parse_rational(o.gamma);
  Rational rho = 0;
  if (!o.rho.empty()) {
    rho = parse_rational(o.rho);
  } else if (base && base->kind == DomainKind::kOrthantAnnulus) {
    rho = base->rho;
  }
  bool orthant = base ? base->orthant() : false;
  if (o.orthant) orthant = true;
  if (o.no_orthant) orthant = false;
  DomainSpec d;
  if (rho > 0) {
    if (!orthant) throw std::invalid_argument("an inner radius requires the orthant domain");
    d = DomainSpec::orthant_annulus(rho, gamma);
  } else {
    d = orthant ? DomainSpec::orthant_ball(gamma) : DomainSpec::ball(gamma);
  }
  d.validate();
  return d;
}

SolverConfig build_solver(const CommonOptions& o) {
  SolverConfig s;
  s.executable = o.solver;
  if (!o.solver_args.empty()) s.args = o.solver_args;
  s.time_limit_seconds = o.solver_timeout;
  s.validate();
  return s;
}

CegisConfig build_config(const CommonOptions& o, const Target& target) {
  if (o.max_iterations < 1) throw std::invalid_argument("--max-iterations must be >= 1");
  CegisConfig cfg;
  cfg.shape.input_dim = target.field.dimension();
  cfg.shape.hidden_widths = parse_size_list(o.hidden, "--hidden");
  const auto degrees = parse_size_list(o.degrees, "--degrees");
  cfg.shape.activation_degrees.clear();
  if (degrees.size() == 1) {
    cfg.shape.activation_degrees.assign(cfg.shape.hidden_widths.size(), static_cast<unsigned>(degrees[0]));
  } else {
    for (auto d : degrees) cfg.shape.activation_degrees.push_back(static_cast<unsigned>(d));
  }
  cfg.last_layer = parse_last_layer_mode(o.last_layer);
  cfg.learner.epsilon = o.epsilon;
  if (o.slope != "auto") {
    try {
      std::size_t used = 0;
      cfg.learner.slope = std::stod(o.slope, &used);
      if (used != o.slope.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw std::invalid_argument("--slope must be 'auto' or a number, got '" + o.slope + "'");
    }
  }
  cfg.learner.learning_rate = o.lr;
  cfg.learner.max_epochs = o.epochs;
  cfg.solver = build_solver(o);
  cfg.domain = resolve_domain(o, target.domain);
  cfg.initial_samples = o.initial_samples;
  cfg.max_iterations = static_cast<std::size_t>(o.max_iterations);
  cfg.augmentation_count = o.cex_points;
  cfg.radius_fraction = o.radius_fraction;
  cfg.fallback_budget = o.fallback_budget;
  cfg.degree_cap = o.degree_cap;
  cfg.parallel_queries = !o.sequential_queries;
  cfg.seed = o.seed;
  cfg.learner.seed = o.seed;
  cfg.validate();
  return cfg;
}

int exit_code(CegisStatus status) {
  switch (status) {
    case CegisStatus::kVerified: return kVerified;
    case CegisStatus::kExhausted: return kExhausted;
    case CegisStatus::kVerifierInconclusive: return kInconclusive;
  }
  return kError;
}

std::string describe_iteration(const IterationRecord& rec) {
  std::ostringstream s;
  s << "iteration " << rec.iteration << ": samples=" << rec.samples << " epochs=" << rec.epochs
    << " verdict=" << to_string(rec.verdict);
  if (!rec.verdict_source.empty()) s << " via " << rec.verdict_source;
  if (!rec.counterexamples.empty()) s << " counterexamples=" << rec.counterexamples.size();
  if (!rec.reason.empty()) s << " reason=" << rec.reason;
  return s.str();
}

int cmd_synth(const CommonOptions& o, std::ostream& out) {
  const Target target = resolve_target(o);
  const CegisConfig cfg = build_config(o, target);
  std::optional<RunArtifacts> artifacts;
  if (!o.out.empty()) {
    artifacts.emplace(o.out, o.emit_smt);
    artifacts->write_config(cfg, target.label, target.field);
  } else if (o.emit_smt) {
    throw std::invalid_argument("--emit-smt needs --out");
  }

  out << "system: " << target.label << " (" << cfg.domain.describe() << ")\n";
  CegisHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& rec) { out << describe_iteration(rec) << std::endl; };
  if (artifacts) {
    hooks.on_script = [&](std::size_t it, QueryKind which, const std::string& script) {
      artifacts->write_script(it, which, script);
    };
  }
  if (o.verbose) hooks.on_epoch = [&](const EpochRecord& r) { out << format_epoch_record(r) << '\n'; };

  const CegisOutcome outcome = run_cegis(target.field, cfg, hooks);
  if (artifacts) artifacts->write_outcome(outcome, target.field);

  double train = 0, translate = 0, falsify = 0, verify_s = 0;
  for (const auto& rec : outcome.history) {
    train += rec.train_seconds;
    translate += rec.translate_seconds;
    falsify += rec.falsify_seconds;
    verify_s += rec.verify_seconds;
  }
  out << "verdict: " << to_string(outcome.status) << '\n';
  if (!outcome.reason.empty()) out << "reason: " << outcome.reason << '\n';
  out << "iterations: " << outcome.iterations << '\n';
  if (outcome.certificate) out << "certificate: V = " << to_string(outcome.certificate->v, target.field.variable_names()) << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "time [s]: train=%.3f translate=%.3f falsify=%.3f verify=%.3f total=%.3f\n", train,
                translate, falsify, verify_s, outcome.total_seconds);
  out << line;
  return exit_code(outcome.status);
}

struct SweepOptions {
  std::string hidden_grid = "2,5,10";
  std::string gamma_grid = "10,20,50";
  std::string csv;
};

std::string sweep_status(const CegisOutcome& outcome) {
  switch (outcome.status) {
    case CegisStatus::kVerified: return "success";
    case CegisStatus::kExhausted: return "oot";
    case CegisStatus::kVerifierInconclusive: return outcome.reason == "timeout" ? "oot" : "unknown";
  }
  return "error";
}

int cmd_sweep(const CommonOptions& o, const SweepOptions& s, std::ostream& out, std::ostream& err) {
  const Target target = resolve_target(o);
  const auto widths = parse_size_list(s.hidden_grid, "--hidden-grid");
  const auto gammas = split(s.gamma_grid, ',');
  struct Row {
    std::size_t hidden;
    std::string gamma;
    std::string status;
    std::size_t iterations;
    double seconds;
  };
  std::vector<Row> rows;
  for (const auto h : widths) {
    for (const auto& g : gammas) {
      CommonOptions cell = o;
      cell.hidden = std::to_string(h);
      cell.gamma = g;
      Row row{h, g, "error", 0, 0};
      try {
        const CegisConfig cfg = build_config(cell, target);
        const CegisOutcome outcome = run_cegis(target.field, cfg);
        row.status = sweep_status(outcome);
        row.iterations = outcome.iterations;
        row.seconds = outcome.total_seconds;
      } catch (const std::exception& e) {
        err << "cell h=" << h << " gamma=" << g << ": " << e.what() << '\n';
      }
      rows.push_back(row);
    }
  }

  char line[256];
  std::snprintf(line, sizeof line, "%-10s %6s %10s %8s %10s %10s\n", "benchmark", "hidden", "gamma", "status",
                "iterations", "seconds");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %6zu %10s %8s %10zu %10.3f\n", target.label.c_str(), r.hidden,
                  r.gamma.c_str(), r.status.c_str(), r.iterations, r.seconds);
    out << line;
  }

  std::string csv_path = s.csv;
  if (csv_path.empty() && !o.out.empty()) {
    std::filesystem::create_directories(o.out);
    csv_path = (std::filesystem::path(o.out) / "sweep.csv").string();
  }
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    csv << "benchmark,hidden,gamma,status,iterations,seconds\n";
    for (const auto& r : rows) {
      std::snprintf(line, sizeof line, "%s,%zu,%s,%s,%zu,%.3f\n", target.label.c_str(), r.hidden, r.gamma.c_str(),
                    r.status.c_str(), r.iterations, r.seconds);
      csv << line;
    }
  }
  return 0;
}

struct LevelsetOptions {
  std::string certificate;
  std::size_t resolution = 41;
  std::string bounds = "-1,1,-1,1";
  std::string counterexamples;
  std::string output;
};

std::vector<std::string> check_certificate_variables(const StoredCertificate& cert, const VectorField& f) {
  if (cert.variable_names != f.variable_names()) {
    throw std::invalid_argument("certificate variables do not match the system's");
  }
  return cert.variable_names;
}

int cmd_levelsets(const CommonOptions& o, const LevelsetOptions& l, std::ostream& out) {
  const Target target = resolve_target(o);
  if (target.field.dimension() != 2) {
    throw std::invalid_argument("levelsets needs a 2-dimensional system, got dimension " +
                                std::to_string(target.field.dimension()));
  }
  if (l.resolution == 0) throw std::invalid_argument("--resolution must be >= 1");
  const StoredCertificate cert = load_certificate(l.certificate);
  check_certificate_variables(cert, target.field);
  const CertificateCandidate cand = make_candidate(cert.v, target.field);
  const auto b = split(l.bounds, ',');
  if (b.size() != 4) throw std::invalid_argument("--bounds expects xmin,xmax,ymin,ymax");
  const Rational x0 = parse_rational(b[0]), x1 = parse_rational(b[1]);
  const Rational y0 = parse_rational(b[2]), y1 = parse_rational(b[3]);

  std::ofstream file;
  std::ostream* sink = &out;
  if (!l.output.empty()) {
    file.open(l.output);
    if (!file) throw std::runtime_error("cannot write " + l.output);
    sink = &file;
  }
  auto axis = [&](const Rational& lo, const Rational& hi, std::size_t i) -> Rational {
    if (l.resolution == 1) return (lo + hi) / 2;
    return lo + (hi - lo) * Rational(static_cast<long>(i)) / Rational(static_cast<long>(l.resolution - 1));
  };
  auto emit = [&](const char* layer, const std::vector<Rational>& p) {
    *sink << layer << ',' << format_double(to_double(p[0])) << ',' << format_double(to_double(p[1])) << ','
          << format_double(to_double(cand.v(p))) << ',' << format_double(to_double(cand.vdot(p))) << '\n';
  };
  *sink << "layer,x,y,V,Vdot\n";
  for (std::size_t i = 0; i < l.resolution; ++i) {
    for (std::size_t j = 0; j < l.resolution; ++j) emit("grid", {axis(x0, x1, i), axis(y0, y1, j)});
  }
  if (!l.counterexamples.empty()) {
    std::ifstream in(l.counterexamples);
    if (!in) throw std::runtime_error("cannot read " + l.counterexamples);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto cols = split(line, ',');
      if (cols.size() != 5) continue;
      emit("counterexample", {parse_rational(cols[3]), parse_rational(cols[4])});
    }
  }
  return 0;
}

struct CheckOptions {
  std::string certificate;
  std::size_t samples = 0;
};

int cmd_check(const CommonOptions& o, const CheckOptions& c, std::ostream& out) {
  const Target target = resolve_target(o);
  const StoredCertificate cert = load_certificate(c.certificate);
  const auto names = check_certificate_variables(cert, target.field);
  const CertificateCandidate cand = make_candidate(cert.v, target.field);
  const DomainSpec domain = resolve_domain(o, target.domain);
  VerifyOptions options;
  options.parallel = !o.sequential_queries;
  options.seed = o.seed;
  const VerifierVerdict verdict = verify(cand, domain, build_solver(o), options);
  out << "domain: " << domain.describe() << '\n';
  out << "V = " << to_string(cand.v, names) << '\n';
  for (const auto& q : verdict.queries) {
    out << to_string(q.which) << ": "
        << (q.status == QueryStatus::kSat ? "sat" : q.status == QueryStatus::kUnsat ? "unsat" : "unknown");
    if (!q.reason.empty()) out << " (" << q.reason << ")";
    out << '\n';
  }
  for (const auto& cex : verdict.counterexamples) {
    out << "counterexample " << to_string(cex.which) << ":";
    for (const auto& q : cex.point) out << ' ' << to_string(q);
    out << '\n';
  }
  if (c.samples > 0) {
    const SampledCheck sc = sampled_violation_check(cand, domain, c.samples, o.seed);
    out << "sampled: " << sc.violations << " violations in " << sc.samples << " points\n";
  }
  out << "verdict: " << to_string(verdict.kind) << '\n';
  switch (verdict.kind) {
    case VerdictKind::kValid: return kVerified;
    case VerdictKind::kFalsified: return kExhausted;
    case VerdictKind::kUnknown: return kInconclusive;
  }
  return kError;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lyapunov neural network synthesis"};
  app.set_config("--config", "", "read options from a TOML/INI file (flags win)");
  app.require_subcommand(1);

  CommonOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "synthesize and verify a Lyapunov function");
  add_run_options(*synth, synth_opts);

  CommonOptions sweep_opts;
  SweepOptions sweep_extra;
  auto* sweep = app.add_subcommand("sweep", "run synth over a grid of hidden widths and radii");
  add_run_options(*sweep, sweep_opts);
  sweep->add_option("--hidden-grid", sweep_extra.hidden_grid, "comma-separated hidden widths");
  sweep->add_option("--gamma-grid", sweep_extra.gamma_grid, "comma-separated radii");
  sweep->add_option("--csv", sweep_extra.csv, "delimited output file");

  CommonOptions level_opts;
  LevelsetOptions level_extra;
  auto* levelsets = app.add_subcommand("levelsets", "tabulate V and its Lie derivative on a 2-d grid");
  add_target_options(*levelsets, level_opts);
  levelsets->add_option("--certificate", level_extra.certificate, "certificate file")->required();
  levelsets->add_option("--resolution", level_extra.resolution, "points per axis");
  levelsets->add_option("--bounds", level_extra.bounds, "xmin,xmax,ymin,ymax");
  levelsets->add_option("--counterexamples", level_extra.counterexamples, "counterexamples.csv to append");
  levelsets->add_option("--output", level_extra.output, "output file (default stdout)");

  CommonOptions check_opts;
  CheckOptions check_extra;
  auto* check = app.add_subcommand("check", "re-verify a stored certificate");
  add_target_options(*check, check_opts);
  add_domain_options(*check, check_opts);
  add_solver_options(*check, check_opts);
  check->add_option("--certificate", check_extra.certificate, "certificate file")->required();
  check->add_option("--samples", check_extra.samples, "also count float violations on this many samples");
  check->add_option("--seed", check_opts.seed, "seed for sampling");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kError;
  }

  try {
    if (*synth) return cmd_synth(synth_opts, out);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_extra, out, err);
    if (*levelsets) return cmd_levelsets(level_opts, level_extra, out);
    if (*check) return cmd_check(check_opts, check_extra, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.push_back("lnn_synth");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lnn::cli
