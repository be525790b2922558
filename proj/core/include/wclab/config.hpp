#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "wclab/experiments.hpp"

namespace wclab {

// Schema violations carry one message per issue, each with its JSON path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::int64_t samples = 100000;
  int workers = 1;
  double epsilon = 0.05;
  std::int64_t pilot_samples = 4000;
  int bins = 4;

  GroupPtr group;
  SubgroupPtr subgroup;
  ActionPtr action;                         // for theorem/corollary kinds
  std::vector<Observable::Probe> phi_probes;
  Alphabet alphabet = Alphabet::coin();
  std::optional<MarkerRule> marker;
  std::vector<double> rotation_angles;

  Window window;     // main comparison window
  Window l1_window;  // sampled-stage window for the gaussian pipeline

  std::string out_dir = "out";
  nlohmann::json resolved;  // normalized config echoed into the report
};

// Parses and validates; throws ConfigError listing all schema violations.
ExperimentConfig parse_config(const std::string& text);

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  bool verify_invariants = false;
};

// Executes the configured experiment: writes report.json and
// distributions/*.csv under the output directory, prints a human-readable
// stage table to `log`. Returns 0 on pass, 1 on fail. Errors propagate as
// exceptions (the CLI maps them to exit code 2).
int run_experiment(ExperimentConfig cfg, const RunFlags& flags, std::ostream& log);

// Report serialization (exposed for the determinism acceptance check).
nlohmann::json report_to_json(const ExperimentReport& rep,
                              const ExperimentConfig& cfg);

}  // namespace wclab
