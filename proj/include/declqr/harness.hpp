#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "declqr/io.hpp"
#include "declqr/learner.hpp"
#include "declqr/rng.hpp"

namespace declqr {

/// Raised for malformed or inconsistent experiment configurations.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Random system generator settings.
///  - "example1": the fixed three-subsystem benchmark graph and block pattern.
///  - "random": each ordered pair gets an edge with probability edge_density;
///    zero-delay edges only point forward in a random node permutation.
///  - "strongly_connected": "random" plus a delay-1 ring through all nodes.
struct GeneratorSpec {
  std::string shape = "example1";
  int p = 3;
  double edge_density = 0.5;
  double delay_one_fraction = 0.5;
  int state_dim = 1;
  int input_dim = 1;
  double rho_A = 0.6;
  double b_scale = 1.0;
  int max_attempts = 100;
};

struct GeneratedSystem {
  NetworkedSystem system;
  CostSpec cost;
};

/// Block-sparse A (nonzero only where D(i, j) <= 1) rescaled to spectral
/// radius rho_A, random B on the same pattern, Q = I, R = I. Retries when the
/// root Riccati equations have no stabilizing solution; throws
/// std::runtime_error once max_attempts is exhausted.
GeneratedSystem generate_system(const GeneratorSpec& spec, double sigma_w, Rng& rng);

/// How a learner setting is resolved per (system, T).
struct LearnerSettings {
  std::optional<int> N;          // default ceil(sqrt(T)); "theory" uses the formula
  bool N_theory = false;
  std::optional<int> h;          // default 4 D_max + 4
  bool h_theory = false;         // max{4 D_max + 4, ceil(4 log T / (1 - gamma))}
  double lambda = 1.0;
  std::optional<double> alpha;   // default sigma_min(R) sigma_w^2 / 2
  std::optional<double> radius;  // default class_radius
  std::optional<double> R_x;
  std::optional<double> R_u;
  std::optional<double> vartheta;
};

struct ExperimentConfig {
  std::optional<std::string> system_file;
  GeneratorSpec generator;
  std::optional<double> sigma_w;  // overrides the system file; default 1
  double sigma_u = 1.0;
  LearnerSettings learner;
  std::vector<int> T;
  int replications = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int workers = 0;
  bool audit = true;
  bool baselines = true;
  bool traces = false;
};

/// Throws ConfigError.
ExperimentConfig parse_config(const Json& j);
void validate_config(const ExperimentConfig& config);

/// Resolved learner configuration and the constants it came from.
struct ResolvedRun {
  LearnerConfig learner;
  AnalysisConstants constants;
  std::vector<std::string> warnings;
};

ResolvedRun resolve_learner(const LearnerSettings& s, const NetworkedSystem& system,
                            const CostSpec& cost, const Synthesis& syn, int T,
                            double sigma_u);

/// The system used by replication `rep` (fixed when loaded from a file).
GeneratedSystem replication_system(const ExperimentConfig& config, int rep);

/// Seeds for replication `rep` at horizon T.
struct ReplicationSeeds {
  std::uint64_t system = 0;
  RunStreams streams;
};
ReplicationSeeds replication_seeds(std::uint64_t master, int T, int rep);

struct ResultRow {
  int T = 0;
  int replication = 0;
  std::uint64_t seed = 0;  // noise stream seed
  double regret = 0.0;
  double phi_error = 0.0;
  std::string audit = "off";  // pass | fail | off
  double j_star = 0.0;
  bool has_baselines = false;
  double learned_cost = 0.0;  // sum of stage costs over t < T
  double optimal_cost = 0.0;
  double zero_cost = 0.0;
  std::uint64_t fallback = 0;  // final latch bitmask
  std::string status = "ok";
};

struct TSummary {
  int T = 0;
  int ok = 0;
  double mean_regret = 0.0;
  double median_regret = 0.0;
  double mean_optimal_regret = 0.0;
  double mean_zero_regret = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<TSummary> per_T;
  std::optional<double> slope;  // only with >= 3 T points and positive means
};

/// One replication; failures are recorded in `status`, never thrown.
ResultRow run_replication(const ExperimentConfig& config, int T, int rep);

/// Runs every (T, rep) on the OpenMP runner (`serial` selects the reference
/// runner) and summarizes. Writes nothing.
ResultTable run_experiment(const ExperimentConfig& config, bool serial = false);

/// run_experiment with the optimal and zero-input policies always evaluated
/// on the learner's noise realizations.
ResultTable compare_baselines(const ExperimentConfig& config, bool serial = false);

void summarize(ResultTable& table);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string results_csv(const ResultTable& table);
Json summary_json(const ResultTable& table);

/// Writes results.csv and summary.json into config.out_dir (created if needed).
void write_outputs(const ExperimentConfig& config, const ResultTable& table);

}  // namespace declqr
