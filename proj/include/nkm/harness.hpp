#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nkm/dataset.hpp"
#include "nkm/graph.hpp"
#include "nkm/nkmeans.hpp"
#include "nkm/verify.hpp"

namespace nkm::harness {

// CLI exit codes (max_rounds is the distinct code for a run that exhausted
// its round budget with a partial trace written).
enum class ExitCode : int {
  ok = 0,
  validation_error = 2,
  invariant_violation = 3,
  guard_exceeded = 4,
  max_rounds = 5,
};

struct MixtureSource {
  MixtureSpec spec;
  std::uint64_t seed = 0;
};

struct TopologySpec {
  // exactly one of: generator kind, explicit edges, or a file path
  std::optional<GraphKind> kind;
  int num_agents = 0;
  std::optional<double> edge_prob;
  std::uint64_t seed = 0;
  std::optional<std::vector<std::pair<int, int>>> edges;
  std::optional<std::string> path;
};

struct InitSpec {
  enum class Scheme { shared_vector, random_datapoints };
  Scheme scheme = Scheme::shared_vector;
  Heads heads;               // shared-vector: the common p x K tuple
  std::uint64_t seed = 0;    // random-datapoints
};

struct ExperimentConfig {
  std::variant<std::string, MixtureSource> dataset;  // path or generator
  TopologySpec topology;
  int k = 2;
  std::vector<double> rho_list;
  std::optional<double> alpha;  // absent: auto
  int max_rounds = 20000;
  double head_tol = 1e-10;
  int stability_window = 10;
  InitSpec init;
  std::string out_dir = "out";
};

// Parses the single-document JSON config; relative paths are resolved
// against the config file's directory and must exist at load.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const std::string& text, const std::string& base_dir);

FederatedDataset resolve_dataset(const ExperimentConfig& cfg);
Topology resolve_topology(const ExperimentConfig& cfg);
NetworkHeads build_init(const ExperimentConfig& cfg, const FederatedDataset& d, int num_agents);

struct GenerateResult {
  std::string dataset_path;
  std::string provenance_path;
};
GenerateResult cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir);

struct RunArtifacts {
  ExitCode status = ExitCode::ok;
  RunResult result;
  GenMinReport report;
  std::string trace_path;
  std::string trajectory_path;
  std::string state_path;
  std::string report_path;
};
RunArtifacts cmd_run(const ExperimentConfig& cfg, double rho, const std::string& out_dir);

struct SweepRow {
  double rho = 0.0;
  double final_cost_q = 0.0;
  double rho_cost_q = 0.0;
  double consensus_dev = 0.0;
  double consensus_bound = 0.0;
  std::optional<int> partition_convergence_round;
  int rounds_run = 0;
  double nearest_violation = 0.0;
  double fixed_point_residual = 0.0;
  std::string status;  // ok | max_rounds | invariant_violation | error:<what>
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string summary_path;
  ExitCode status = ExitCode::ok;  // worst row status
};
SweepResult cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

struct OracleResult {
  double f_star = 0.0;
  double q_global_cost = 0.0;
  GapCheck gap;
  std::vector<Heads> z_g;
  std::string report_path;
};
OracleResult cmd_oracle(const ExperimentConfig& cfg, double rho, const std::string& out_dir);

struct LloydArtifacts {
  LloydResult result;
  double cost = 0.0;
  std::string report_path;
};
LloydArtifacts cmd_lloyd(const ExperimentConfig& cfg, const std::string& out_dir);

struct VerifyArtifacts {
  ExitCode status = ExitCode::ok;
  GenMinReport report;
  std::string report_json;
};
VerifyArtifacts cmd_verify(const ExperimentConfig& cfg, double rho,
                           const std::string& state_path, double tol);

}  // namespace nkm::harness
