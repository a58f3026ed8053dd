#pragma once

#include <cstdint>
#include <vector>

#include "declqr/dfc.hpp"
#include "declqr/riccati.hpp"
#include "declqr/sysid.hpp"

namespace declqr {

struct LearnerConfig {
  int N = 1;          // exploration length
  int T = 1;          // scored horizon
  int h = 4;          // DFC horizon
  double lambda = 1.0;
  double sigma_u = 1.0;
  double R_x = 1e300;
  double R_u = 1e300;
  double vartheta = 1e300;
  double alpha = 0.5;
  double radius = 1.0;  // per-block Frobenius cap of the DFC class
  bool record_params = false;
};

enum class Phase : std::uint8_t { Exploration, Warmup, Control };

const char* phase_name(Phase p);

struct RunTrace {
  LearnerConfig config;
  int D_max = 0;
  Estimate estimate;               // after sparsification and thresholding
  bool estimate_discarded = false;
  double phi_error = 0.0;          // ||[A B] - [Â B̂]||
  std::vector<VectorXd> x;         // x_0 .. x_{T+D_max}
  std::vector<VectorXd> u;         // u_0 .. u_{T+D_max-1}
  std::vector<double> cost;        // c(x_t, u_t)
  std::vector<Phase> phase;
  std::vector<std::uint64_t> fallback;  // bit i set once controller i has latched
  std::vector<DfcParams> params;   // M_t, only with config.record_params

  int steps() const { return static_cast<int>(u.size()); }
  int control_start() const { return config.N + D_max; }
};

/// Random streams for one run: process noise and exploration inputs.
struct RunStreams {
  std::uint64_t noise_seed = 0;
  std::uint64_t input_seed = 0;
};

/// Checks the preconditions of the online loop; returns diagnostics (empty when ok).
std::vector<std::string> learner_preconditions(const NetworkedSystem& system,
                                               const CostSpec& cost,
                                               const LearnerConfig& config, int D_max);

/// Exploration, identification, warmup and the online DFC loop through
/// t = T + D_max - 1. Throws std::invalid_argument on failed preconditions and
/// std::runtime_error on numerical overflow.
RunTrace run_online_control(const NetworkedSystem& system, const CostSpec& cost,
                            const Synthesis& syn, const LearnerConfig& config,
                            const RunStreams& streams);

struct SafetyRadii {
  double R_w = 0.0;
  double R_u = 0.0;
  double R_x = 0.0;
  double R_w_hat = 0.0;
  double Delta_R_w = 0.0;
  double vartheta = 0.0;
};

/// Closed-form default radii. `epsilon_bar` is the estimation radius from
/// recommend_exploration_length.
SafetyRadii default_safety_radii(const AnalysisConstants& c, int n, int m, int p, int q,
                                 double sigma_w, double sigma_u, int h, double T,
                                 double epsilon_bar);

/// sigma_min(R) sigma_w^2 / 2.
double default_alpha(const CostSpec& cost, double sigma_w);

/// max{4 D_max + 4, ceil(4 log T / (1 - gamma))}.
int default_horizon(int D_max, double gamma, double T);

struct RegretSeries {
  double total = 0.0;
  std::vector<double> cumulative;
};

/// Per-step c(x_t, u_t) - J* accumulated over t = 0..T-1.
RegretSeries regret(const RunTrace& trace, double J_star);
RegretSeries regret(const std::vector<double>& costs, int T, double J_star);

/// Optimal decentralized policy on the given noise stream; stage costs for t < T.
std::vector<double> simulate_optimal(const NetworkedSystem& system, const CostSpec& cost,
                                     const Synthesis& syn, int T, std::uint64_t noise_seed);

/// u = 0 on the given noise stream; stage costs for t < T.
std::vector<double> simulate_zero_input(const NetworkedSystem& system, const CostSpec& cost,
                                        int T, std::uint64_t noise_seed);

}  // namespace declqr
