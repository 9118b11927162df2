#include "lnn/run_artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json domain_to_json(const DomainSpec& d) {
  json j;
  j["description"] = d.describe();
  j["gamma"] = to_string(d.gamma);
  j["rho"] = to_string(d.rho);
  j["orthant"] = d.orthant();
  return j;
}

}  // namespace

nlohmann::json config_to_json(const CegisConfig& cfg) {
  json j;
  j["hidden"] = cfg.shape.hidden_widths;
  j["degrees"] = cfg.shape.activation_degrees;
  j["last_layer"] = to_string(cfg.last_layer);
  j["epsilon"] = cfg.learner.epsilon;
  j["slope"] = cfg.learner.slope ? json(*cfg.learner.slope) : json("auto");
  j["learning_rate"] = cfg.learner.learning_rate;
  j["max_epochs"] = cfg.learner.max_epochs;
  j["domain"] = domain_to_json(cfg.domain);
  j["initial_samples"] = cfg.initial_samples;
  j["max_iterations"] = cfg.max_iterations;
  j["cex_points"] = cfg.augmentation_count;
  j["radius_fraction"] = cfg.radius_fraction;
  j["fallback_budget"] = cfg.fallback_budget;
  j["degree_cap"] = cfg.degree_cap;
  j["seed"] = cfg.seed;
  j["solver"] = {{"executable", cfg.solver.executable},
                 {"args", cfg.solver.args},
                 {"time_limit_seconds", cfg.solver.time_limit_seconds}};
  return j;
}

nlohmann::json iteration_to_json(const IterationRecord& rec, const std::vector<std::string>& names) {
  json j;
  j["iteration"] = rec.iteration;
  j["samples"] = rec.samples;
  j["epochs"] = rec.epochs;
  j["learner_converged"] = rec.learner_converged;
  j["slope"] = rec.slope;
  j["verdict"] = to_string(rec.verdict);
  j["verdict_source"] = rec.verdict_source;
  if (!rec.reason.empty()) j["reason"] = rec.reason;
  j["candidate"] = to_string(rec.candidate_v, names);
  json cexs = json::array();
  for (const auto& c : rec.counterexamples) {
    json point = json::array();
    for (const auto& q : c.point) point.push_back(to_string(q));
    cexs.push_back({{"query", to_string(c.which)}, {"source", c.source}, {"point", point}});
  }
  j["counterexamples"] = cexs;
  j["seconds"] = {{"train", rec.train_seconds},
                  {"translate", rec.translate_seconds},
                  {"falsify", rec.falsify_seconds},
                  {"verify", rec.verify_seconds}};
  return j;
}

nlohmann::json outcome_to_json(const CegisOutcome& outcome, const std::vector<std::string>& names) {
  json j;
  j["status"] = to_string(outcome.status);
  j["iterations"] = outcome.iterations;
  if (!outcome.reason.empty()) j["reason"] = outcome.reason;
  if (outcome.certificate) j["certificate"] = to_string(outcome.certificate->v, names);
  j["total_seconds"] = outcome.total_seconds;
  json history = json::array();
  for (const auto& rec : outcome.history) history.push_back(iteration_to_json(rec, names));
  j["history"] = history;
  return j;
}

RunArtifacts::RunArtifacts(fs::path dir, bool emit_smt) : dir_(std::move(dir)), emit_smt_(emit_smt) {
  fs::create_directories(dir_);
}

void RunArtifacts::write_config(const CegisConfig& cfg, const std::string& target, const VectorField& f) const {
  json j = config_to_json(cfg);
  j["target"] = target;
  j["system"] = format_system(f, cfg.domain);
  write_text(dir_ / "config.json", j.dump(2) + "\n");
}

void RunArtifacts::write_script(std::size_t iteration, QueryKind which, const std::string& script) const {
  if (!emit_smt_) return;
  char name[64];
  std::snprintf(name, sizeof name, "iter_%03zu_%s.smt2", iteration, to_string(which).c_str());
  write_text(dir_ / name, script);
}

void RunArtifacts::write_outcome(const CegisOutcome& outcome, const VectorField& f) const {
  const auto& names = f.variable_names();
  std::string csv = "iteration,query,source";
  for (const auto& n : names) csv += "," + n;
  csv += "\n";
  for (const auto& rec : outcome.history) {
    for (const auto& c : rec.counterexamples) {
      csv += std::to_string(rec.iteration) + "," + to_string(c.which) + "," + c.source;
      for (const auto& q : c.point) csv += "," + to_string(q);
      csv += "\n";
    }
  }
  write_text(dir_ / "counterexamples.csv", csv);
  if (outcome.certificate) write_text(dir_ / "certificate.txt", format_certificate(*outcome.certificate));
  write_text(dir_ / "history.json", outcome_to_json(outcome, names).dump(2) + "\n");
}

}  // namespace lnn
