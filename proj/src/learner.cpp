#include "declqr/learner.hpp"

#include "declqr/oco.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace declqr {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Exploration:
      return "exploration";
    case Phase::Warmup:
      return "warmup";
    case Phase::Control:
      return "control";
  }
  return "?";
}

std::vector<std::string> learner_preconditions(const NetworkedSystem& system,
                                               const CostSpec& cost,
                                               const LearnerConfig& config, int D_max) {
  std::vector<std::string> out;
  const ValidationReport rep = validate_system(system, cost);
  out.insert(out.end(), rep.errors.begin(), rep.errors.end());
  if (!is_open_loop_stable(system)) out.emplace_back("A is not stable");
  if (config.h < 1) out.emplace_back("h must be >= 1");
  if (config.N < 1) out.emplace_back("N must be >= 1");
  if (config.T < config.N + 3 * config.h + D_max) {
    out.emplace_back("T must be at least N + 3h + D_max");
  }
  if (!(config.R_x > 0 && config.R_u > 0 && config.vartheta > 0 && config.radius > 0 &&
        config.alpha > 0)) {
    out.emplace_back("radii, vartheta and alpha must be positive");
  }
  if (config.lambda < 0) out.emplace_back("lambda must be nonnegative");
  return out;
}

RunTrace run_online_control(const NetworkedSystem& system, const CostSpec& cost,
                            const Synthesis& syn, const LearnerConfig& config,
                            const RunStreams& streams) {
  const int D_max = syn.D.max_finite();
  if (const auto errs = learner_preconditions(system, cost, config, D_max); !errs.empty()) {
    throw std::invalid_argument("learner preconditions: " + errs.front());
  }
  const int n = system.layout.n();
  const int m = system.layout.m();
  const int p = system.layout.nodes();
  const int N = config.N;
  const int start = N + D_max;
  const int end = config.T + D_max;  // exclusive

  Rng noise_rng(streams.noise_seed);
  Rng input_rng(streams.input_seed);

  RunTrace trace;
  trace.config = config;
  trace.D_max = D_max;

  // Identification.
  Trajectory traj = run_exploration(system, N, config.sigma_u, noise_rng, input_rng);
  trace.estimate = sparsify(regularized_ls(traj, config.lambda), syn.D, system.layout,
                            config.lambda, N);
  trace.estimate_discarded = apply_threshold(trace.estimate, config.vartheta);
  trace.phi_error = estimation_error(system, trace.estimate);
  const Estimate local = neighbor_restricted(trace.estimate, syn.D, system.layout);

  trace.x = std::move(traj.states);
  trace.u = std::move(traj.inputs);
  trace.x.reserve(end + 1);
  trace.u.reserve(end);
  for (int t = 0; t < N; ++t) {
    trace.cost.push_back(stage_cost(cost, trace.x[t], trace.u[t]));
    trace.phase.push_back(Phase::Exploration);
    trace.fallback.push_back(0);
  }

  const DfcStructure st(syn.ig, system.layout, config.h);
  DfcParams zero(st, config.radius);
  DisturbanceHistory hist(n, history_capacity(D_max, config.h), N);
  // M_{t-D_max}, ..., M_t.
  std::deque<DfcParams> window(D_max + 1, zero);
  if (config.record_params) trace.params.assign(N, zero);

  std::uint64_t latched = 0;
  const auto plant_step = [&](int t, const VectorXd& u) {
    const VectorXd w = gaussian_vector(noise_rng, n, system.sigma_w);
    const VectorXd x_next = step(system, trace.x[t], u, w);
    if (!x_next.allFinite()) {
      throw std::runtime_error("state overflow at t = " + std::to_string(t));
    }
    hist.push(t, x_next - local.A_hat * trace.x[t] - local.B_hat * u);
    trace.x.push_back(x_next);
    trace.u.push_back(u);
    trace.cost.push_back(stage_cost(cost, trace.x[t], u));
  };

  for (int t = N; t < start; ++t) {
    plant_step(t, VectorXd::Zero(m));
    trace.phase.push_back(Phase::Warmup);
    trace.fallback.push_back(0);
    if (config.record_params) trace.params.push_back(zero);
  }

  for (int t = start; t < end; ++t) {
    const DfcParams& M_t = window.back();
    VectorXd u = dfc_control(st, M_t, hist, t);
    for (int i = 0; i < p; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      const int xo = system.layout.state_offset(i);
      const int uo = system.layout.input_offset(i);
      const int ni = system.layout.state_dim(i);
      const int mi = system.layout.input_dim(i);
      if (!(latched & bit) && (trace.x[t].segment(xo, ni).norm() > config.R_x ||
                               u.segment(uo, mi).norm() > config.R_u)) {
        latched |= bit;
      }
      if (latched & bit) u.segment(uo, mi).setZero();
    }
    if (config.record_params) trace.params.push_back(M_t);
    plant_step(t, u);
    trace.phase.push_back(Phase::Control);
    trace.fallback.push_back(latched);

    const int target = t - D_max;
    const DfcParams grad =
        grad_counterfactual(st, window.front(), trace.estimate, cost, hist, target);
    DfcParams next = M_t;
    next.axpy(-oco_step_size(config.alpha, t), grad);
    window.push_back(project_onto_class(next, config.radius));
    window.pop_front();
  }
  return trace;
}

SafetyRadii default_safety_radii(const AnalysisConstants& c, int n, int m, int p, int q,
                                 double sigma_w, double sigma_u, int h, double T,
                                 double epsilon_bar) {
  SafetyRadii r;
  const double sig_hi = std::max(sigma_w, sigma_u);
  const double G = c.Gamma;
  const double k = c.kappa;
  const double one_minus = 1.0 - c.gamma;
  r.R_w = sigma_w * std::sqrt(10.0 * n * std::log(2.0 * T));
  r.R_u = 4.0 * q * r.R_w * h * std::sqrt(double(n)) * k * p * p * std::pow(G, 2 * c.D_max);
  const double excite = sig_hi * std::sqrt(20.0 * (m + n));
  r.R_x = excite * G * k * k / one_minus + (G * r.R_u + r.R_w) * k / one_minus;
  r.R_w_hat = (G * k / one_minus + 1.0) * epsilon_bar * r.R_u + r.R_w +
              epsilon_bar * k / one_minus * (k * excite * G + r.R_w);
  r.Delta_R_w = (G * k / one_minus + 1.0) * r.R_u + k / one_minus * (k * excite * G + r.R_w);
  r.vartheta = G + epsilon_bar;
  return r;
}

double default_alpha(const CostSpec& cost, double sigma_w) {
  return min_singular_value(cost.R) * sigma_w * sigma_w / 2.0;
}

int default_horizon(int D_max, double gamma, double T) {
  const int structural = 4 * D_max + 4;
  const int mixing = static_cast<int>(std::ceil(4.0 * std::log(T) / (1.0 - gamma)));
  return std::max(structural, mixing);
}

RegretSeries regret(const std::vector<double>& costs, int T, double J_star) {
  if (static_cast<int>(costs.size()) < T) throw std::invalid_argument("regret: trace too short");
  RegretSeries r;
  r.cumulative.reserve(T);
  for (int t = 0; t < T; ++t) {
    r.total += costs[t] - J_star;
    r.cumulative.push_back(r.total);
  }
  return r;
}

RegretSeries regret(const RunTrace& trace, double J_star) {
  return regret(trace.cost, trace.config.T, J_star);
}

std::vector<double> simulate_optimal(const NetworkedSystem& system, const CostSpec& cost,
                                     const Synthesis& syn, int T, std::uint64_t noise_seed) {
  Rng noise_rng(noise_seed);
  std::vector<double> costs;
  costs.reserve(T);
  std::vector<VectorXd> zeta = zero_zeta(syn);
  VectorXd x = VectorXd::Zero(system.layout.n());
  for (int t = 0; t < T; ++t) {
    const VectorXd w = gaussian_vector(noise_rng, system.layout.n(), system.sigma_w);
    OptimalStep os = optimal_controller_step(syn, zeta, w);
    costs.push_back(stage_cost(cost, x, os.u));
    x = step(system, x, os.u, w);
    zeta = std::move(os.zeta_next);
  }
  return costs;
}

std::vector<double> simulate_zero_input(const NetworkedSystem& system, const CostSpec& cost,
                                        int T, std::uint64_t noise_seed) {
  Rng noise_rng(noise_seed);
  std::vector<double> costs;
  costs.reserve(T);
  const VectorXd u = VectorXd::Zero(system.layout.m());
  VectorXd x = VectorXd::Zero(system.layout.n());
  for (int t = 0; t < T; ++t) {
    const VectorXd w = gaussian_vector(noise_rng, system.layout.n(), system.sigma_w);
    costs.push_back(stage_cost(cost, x, u));
    x = step(system, x, u, w);
  }
  return costs;
}

}  // namespace declqr
