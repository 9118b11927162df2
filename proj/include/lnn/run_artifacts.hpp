#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "lnn/cegis.hpp"

namespace lnn {

nlohmann::json config_to_json(const CegisConfig& cfg);
nlohmann::json iteration_to_json(const IterationRecord& rec, const std::vector<std::string>& names);
nlohmann::json outcome_to_json(const CegisOutcome& outcome, const std::vector<std::string>& names);

/// One run's output directory:
///   config.json, iter_NNN_phi{1,2}.smt2 (optional), counterexamples.csv,
///   certificate.txt (Verified only), history.json.
class RunArtifacts {
 public:
  RunArtifacts(std::filesystem::path dir, bool emit_smt);

  const std::filesystem::path& directory() const { return dir_; }
  void write_config(const CegisConfig& cfg, const std::string& target, const VectorField& f) const;
  void write_script(std::size_t iteration, QueryKind which, const std::string& script) const;
  void write_outcome(const CegisOutcome& outcome, const VectorField& f) const;

 private:
  std::filesystem::path dir_;
  bool emit_smt_;
};

}  // namespace lnn
