#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "paged/paged.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

struct Flags {
  std::optional<double> p, epsilon, tau_max, tau_step, alpha, tau, lambda;
  std::optional<int> m, runs, seed_graph_N, retry_cap, k_max, starts;
  std::optional<std::int64_t> n, reveal_cap, round_cap, birth_cap, v;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> omega, on_depleted, mode;
  std::string out = ".";
  std::string config_file;
  unsigned threads = 0;
  bool to_stdout = false;
};

template <class T>
void put(nlohmann::json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_file, "JSON config file; flags override it");
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
  app->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  app->add_flag("--stdout", f.to_stdout, "Print artifacts instead of writing files");
  app->add_option("--p", f.p, "Attachment probability p in (1/2, 1)");
  app->add_option("--m", f.m, "Edges per new vertex");
  app->add_option("--seed", f.seed, "Master seed");
}

void add_graph(CLI::App* app, Flags& f) {
  app->add_option("--n", f.n, "Time horizon");
  app->add_option("--runs", f.runs, "Independent runs");
  app->add_option("--seed-graph-N", f.seed_graph_N, "Seed graph size parameter");
  app->add_option("--omega", f.omega, "lnln or const:<x>");
  app->add_option("--epsilon", f.epsilon, "Exponent slack in the default reveal cap");
  app->add_option("--reveal-cap", f.reveal_cap, "Large-verdict reveal threshold");
  app->add_option("--round-cap", f.round_cap, "Component-search round limit");
  app->add_option("--on-depleted", f.on_depleted, "resample or abort")
      ->check(CLI::IsMember({"resample", "abort"}));
  app->add_option("--retry-cap", f.retry_cap, "Sigma redraw limit");
  app->add_option("--k-max", f.k_max, "Largest degree compared against theory");
}

nlohmann::json build_config(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw std::runtime_error("cannot read config file " + f.config_file);
    j = nlohmann::json::parse(in);
  }
  put(j, "p", f.p);
  put(j, "m", f.m);
  put(j, "n", f.n);
  put(j, "seed", f.seed);
  put(j, "runs", f.runs);
  put(j, "seed_graph_N", f.seed_graph_N);
  put(j, "omega", f.omega);
  put(j, "epsilon", f.epsilon);
  put(j, "reveal_cap", f.reveal_cap);
  put(j, "round_cap", f.round_cap);
  put(j, "birth_cap", f.birth_cap);
  put(j, "on_depleted", f.on_depleted);
  put(j, "retry_cap", f.retry_cap);
  put(j, "k_max", f.k_max);
  put(j, "tau_max", f.tau_max);
  put(j, "tau_step", f.tau_step);
  put(j, "alpha", f.alpha);
  put(j, "tau", f.tau);
  put(j, "mode", f.mode);
  put(j, "v", f.v);
  put(j, "starts", f.starts);
  put(j, "lambda", f.lambda);
  if (!j.contains("out")) j["out"] = f.out;
  return j;
}

int exit_code(paged_status s) {
  switch (s) {
    case PAGED_E_CONFIG:
    case PAGED_E_PARAMETER:
    case PAGED_E_UNDEFINED:
      return kExitConfig;
    default:
      return kExitRun;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preferential attachment with deletions: theory tables and experiments"};
  app.set_version_flag("--version", std::string(paged_version()));
  app.require_subcommand(1);
  Flags f;

  auto* theory = app.add_subcommand("theory", "Constants, (tau, q, p) grid and degree law");
  add_common(theory, f);
  theory->add_option("--k-max", f.k_max, "Largest k in the degree law");
  theory->add_option("--tau-max", f.tau_max, "Grid end");
  theory->add_option("--tau-step", f.tau_step, "Grid step");

  auto* simulate = app.add_subcommand("simulate", "Run the on-line process");
  add_common(simulate, f);
  add_graph(simulate, f);

  auto* cmj = app.add_subcommand("cmj", "CMJ branching process batch");
  add_common(cmj, f);
  cmj->add_option("--runs", f.runs, "Traces");
  cmj->add_option("--alpha", f.alpha, "Offspring rate (default alpha(p))");
  cmj->add_option("--tau", f.tau, "Observation time");
  cmj->add_option("--birth-cap", f.birth_cap, "Births per trace before capping");

  auto* master = app.add_subcommand("master", "Master-graph experiments");
  add_common(master, f);
  add_graph(master, f);
  master->add_option("mode", f.mode, "equivalence, components or vertex-degree")
      ->check(CLI::IsMember({"equivalence", "components", "vertex-degree"}));
  master->add_option("--v", f.v, "Vertex for vertex-degree mode (default n/2)");
  master->add_option("--starts", f.starts, "Searches per master graph");
  master->add_option("--lambda", f.lambda, "Expose budget multiplier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::string config;
  try {
    config = build_config(f).dump();
  } catch (const std::exception& e) {
    std::cerr << "paged: " << e.what() << "\n";
    return kExitConfig;
  }

  paged_artifacts* artifacts = nullptr;
  const paged_status s = paged_run_command(command.c_str(), config.c_str(), f.threads, &artifacts);
  if (s != PAGED_OK) {
    std::cerr << "paged: " << paged_status_name(s) << ": " << paged_last_error() << "\n";
    return exit_code(s);
  }

  int code = 0;
  const std::filesystem::path dir = nlohmann::json::parse(config).value("out", f.out);
  try {
    if (!f.to_stdout) std::filesystem::create_directories(dir);
    for (size_t i = 0; i < paged_artifacts_count(artifacts); ++i) {
      const std::string name = paged_artifact_name(artifacts, i);
      const char* content = paged_artifact_content(artifacts, i);
      if (f.to_stdout) {
        std::cout << "== " << name << "\n" << content;
        continue;
      }
      std::ofstream out(dir / name, std::ios::binary);
      out << content;
      if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
      std::cout << (dir / name).string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "paged: " << e.what() << "\n";
    code = kExitRun;
  }
  paged_artifacts_free(artifacts);
  return code;
}
