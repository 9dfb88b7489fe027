#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paged/cmj.hpp"
#include "paged/process.hpp"

namespace paged {

const char* version_string();

struct ExperimentConfig {
  double p = 0.75;
  int m = 2;
  std::int64_t n = 10000;
  std::uint64_t seed = 1;
  int runs = 1;
  int seed_graph_N = 4;
  std::string omega = "lnln";  // lnln | const:<x>
  double epsilon = 0.1;
  std::optional<std::int64_t> reveal_cap;
  std::optional<std::int64_t> round_cap;
  std::int64_t birth_cap = kDefaultBirthCap;
  DepletedPolicy on_depleted = DepletedPolicy::kResample;
  int retry_cap = 100;
  std::string out = ".";

  int k_max = 50;
  double tau_max = 10.0;
  double tau_step = 0.05;
  std::optional<double> alpha;  // cmj; defaults to alpha(p)
  double tau = 1.5;             // cmj observation time
  std::string mode = "equivalence";
  std::optional<std::int64_t> v;  // vertex-degree; defaults to n/2
  int starts = 3;                 // component searches per master graph
  double lambda = 10.0;           // expose budget B(n) = lambda * scale

  nlohmann::ordered_json to_json() const;
  // Unknown keys and ill-typed values raise a config error.
  static ExperimentConfig from_json(const nlohmann::json& j);

  double omega_value() const;
  std::int64_t default_reveal_cap() const;
  std::int64_t effective_reveal_cap() const;
  std::int64_t effective_round_cap() const;
  // Raises a config error unless the fields used by `command` are valid.
  void validate(const std::string& command) const;
};

struct Artifact {
  std::string name;
  std::string content;
};

// command: theory | simulate | cmj | master. Output depends only on the
// config, never on `threads`.
std::vector<Artifact> run_command(const std::string& command,
                                  const ExperimentConfig& config,
                                  unsigned threads = 0);

}  // namespace paged
