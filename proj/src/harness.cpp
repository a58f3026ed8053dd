#include "declqr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "declqr/audit.hpp"
#include "declqr/replications.hpp"

namespace declqr {

namespace {

constexpr double kUnbounded = std::numeric_limits<double>::max();

double finite_or_unbounded(double v) {
  return std::isfinite(v) && v > 0.0 ? v : kUnbounded;
}

std::vector<Edge> example1_edges() {
  // 1 -> 2 (1), 2 -> 1 (0), 2 -> 3 (1), 3 -> 2 (1), 1 -> 3 (1); zero-based.
  return {{0, 1, 1}, {1, 0, 0}, {1, 2, 1}, {2, 1, 1}, {0, 2, 1}};
}

std::vector<Edge> random_edges(const GeneratorSpec& spec, Rng& rng) {
  const int p = spec.p;
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> pos(p);
  for (int k = 0; k < p; ++k) pos[perm[k]] = k;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::set<std::pair<int, int>> seen;
  std::vector<Edge> edges;
  if (spec.shape == "strongly_connected" && p > 1) {
    for (int k = 0; k < p; ++k) {
      const int a = perm[k];
      const int b = perm[(k + 1) % p];
      edges.push_back({a, b, 1});
      seen.insert({a, b});
    }
  }
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      if (a == b || seen.count({a, b})) continue;
      if (unif(rng) >= spec.edge_density) continue;
      // Zero delay only along the permutation, so no zero-delay cycle exists.
      const bool forward = pos[a] < pos[b];
      const int delay = forward && unif(rng) >= spec.delay_one_fraction ? 0 : 1;
      edges.push_back({a, b, delay});
    }
  }
  return edges;
}

bool example1_block(int i, int j) { return !(i == 2 && j == 0); }

MatrixXd random_blocks(const BlockLayout& layout, const DelayMatrix& D, bool inputs,
                       bool example1, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int p = layout.nodes();
  MatrixXd M = MatrixXd::Zero(layout.n(), inputs ? layout.m() : layout.n());
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const bool allowed = i == j || (D(i, j) && *D(i, j) <= 1);
      if (!allowed || (example1 && !example1_block(i, j))) continue;
      const int cols = inputs ? layout.input_dim(j) : layout.state_dim(j);
      const int off = inputs ? layout.input_offset(j) : layout.state_offset(j);
      for (int r = 0; r < layout.state_dim(i); ++r) {
        for (int c = 0; c < cols; ++c) M(layout.state_offset(i) + r, off + c) = scale * normal(rng);
      }
    }
  }
  return M;
}

}  // namespace

GeneratedSystem generate_system(const GeneratorSpec& spec, double sigma_w, Rng& rng) {
  const bool example1 = spec.shape == "example1";
  const int p = example1 ? 3 : spec.p;
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    try {
      CommGraph graph(p, example1 ? example1_edges() : random_edges(spec, rng));
      const DelayMatrix D = compute_delay_matrix(graph);
      BlockLayout layout(std::vector<int>(p, spec.state_dim), std::vector<int>(p, spec.input_dim));
      MatrixXd A = random_blocks(layout, D, false, example1, 1.0, rng);
      const double rho = spectral_radius(A);
      if (rho < 1e-8) {
        last_error = "degenerate A";
        continue;
      }
      A *= spec.rho_A / rho;
      MatrixXd B = random_blocks(layout, D, true, example1, spec.b_scale, rng);
      NetworkedSystem system(std::move(graph), std::move(layout), std::move(A), std::move(B),
                             sigma_w);
      CostSpec cost{MatrixXd::Identity(system.layout.n(), system.layout.n()),
                    MatrixXd::Identity(system.layout.m(), system.layout.m())};
      const ValidationReport rep = validate_system(system, cost);
      if (!rep.ok()) {
        last_error = rep.errors.front();
        continue;
      }
      const Synthesis syn = synthesize(system, cost);
      analysis_constants(system, syn);
      return {std::move(system), std::move(cost)};
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw std::runtime_error("generate_system: attempts exhausted (" + last_error + ")");
}

namespace {

template <typename T>
T get_field(const Json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(std::string("unknown field '") + key + "' in " + where);
    }
  }
}

std::optional<double> optional_double(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (j[key].is_string() && j[key].get<std::string>() == "default") return std::nullopt;
  if (!j[key].is_number()) throw ConfigError(std::string("learner.") + key + " must be a number");
  return j[key].get<double>();
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"system_file", "generator", "sigma_w", "sigma_u", "learner", "T",
                  "replications", "seed", "out_dir", "workers", "audit", "baselines", "traces"},
                 "config");
  ExperimentConfig c;
  if (j.contains("system_file")) c.system_file = get_field<std::string>(j, "system_file", "");
  if (j.contains("generator")) {
    const Json& g = j["generator"];
    if (!g.is_object()) throw ConfigError("generator must be an object");
    reject_unknown(g,
                   {"shape", "p", "edge_density", "delay_one_fraction", "state_dim",
                    "input_dim", "rho_A", "b_scale", "max_attempts"},
                   "generator");
    GeneratorSpec& s = c.generator;
    s.shape = get_field(g, "shape", s.shape);
    s.p = get_field(g, "p", s.p);
    s.edge_density = get_field(g, "edge_density", s.edge_density);
    s.delay_one_fraction = get_field(g, "delay_one_fraction", s.delay_one_fraction);
    s.state_dim = get_field(g, "state_dim", s.state_dim);
    s.input_dim = get_field(g, "input_dim", s.input_dim);
    s.rho_A = get_field(g, "rho_A", s.rho_A);
    s.b_scale = get_field(g, "b_scale", s.b_scale);
    s.max_attempts = get_field(g, "max_attempts", s.max_attempts);
  }
  if (j.contains("sigma_w")) c.sigma_w = get_field(j, "sigma_w", 1.0);
  c.sigma_u = get_field(j, "sigma_u", c.sigma_u);
  if (j.contains("learner")) {
    const Json& l = j["learner"];
    if (!l.is_object()) throw ConfigError("learner must be an object");
    reject_unknown(l, {"N", "h", "lambda", "alpha", "radius", "R_x", "R_u", "vartheta"},
                   "learner");
    LearnerSettings& s = c.learner;
    if (l.contains("N")) {
      if (l["N"].is_string()) {
        const auto v = l["N"].get<std::string>();
        if (v == "theory") s.N_theory = true;
        else if (v != "sqrt") throw ConfigError("learner.N must be an integer, \"sqrt\" or \"theory\"");
      } else {
        s.N = get_field<int>(l, "N", 1);
      }
    }
    if (l.contains("h")) {
      if (l["h"].is_string()) {
        const auto v = l["h"].get<std::string>();
        if (v == "theory") s.h_theory = true;
        else if (v != "structural") {
          throw ConfigError("learner.h must be an integer, \"structural\" or \"theory\"");
        }
      } else {
        s.h = get_field<int>(l, "h", 1);
      }
    }
    s.lambda = get_field(l, "lambda", s.lambda);
    s.alpha = optional_double(l, "alpha");
    s.radius = optional_double(l, "radius");
    s.R_x = optional_double(l, "R_x");
    s.R_u = optional_double(l, "R_u");
    s.vartheta = optional_double(l, "vartheta");
  }
  c.T = get_field(j, "T", c.T);
  c.replications = get_field(j, "replications", c.replications);
  c.seed = get_field(j, "seed", c.seed);
  c.out_dir = get_field(j, "out_dir", c.out_dir);
  c.workers = get_field(j, "workers", c.workers);
  c.audit = get_field(j, "audit", c.audit);
  c.baselines = get_field(j, "baselines", c.baselines);
  c.traces = get_field(j, "traces", c.traces);
  validate_config(c);
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.T.empty()) throw ConfigError("T sweep must not be empty");
  for (std::size_t k = 0; k < c.T.size(); ++k) {
    if (c.T[k] < 1) throw ConfigError("T values must be positive");
    if (k > 0 && c.T[k] <= c.T[k - 1]) throw ConfigError("T values must be strictly ascending");
  }
  if (c.replications < 1) throw ConfigError("replications must be >= 1");
  if (c.sigma_u < 0 || (c.sigma_w && *c.sigma_w < 0)) throw ConfigError("noise levels must be >= 0");
  const LearnerSettings& l = c.learner;
  if (l.lambda < 0) throw ConfigError("learner.lambda must be >= 0");
  if (l.N && *l.N < 1) throw ConfigError("learner.N must be >= 1");
  if (l.h && *l.h < 1) throw ConfigError("learner.h must be >= 1");
  if (!c.system_file) {
    const GeneratorSpec& g = c.generator;
    if (g.shape != "example1" && g.shape != "random" && g.shape != "strongly_connected") {
      throw ConfigError("generator.shape must be example1, random or strongly_connected");
    }
    if (!(g.rho_A > 0.0 && g.rho_A < 1.0)) throw ConfigError("generator.rho_A must be in (0, 1)");
    if (g.p < 1 || g.p > 63) throw ConfigError("generator.p must be in [1, 63]");
    if (g.state_dim < 1 || g.input_dim < 0) throw ConfigError("generator dims must be positive");
    if (g.edge_density < 0 || g.edge_density > 1 || g.delay_one_fraction < 0 ||
        g.delay_one_fraction > 1) {
      throw ConfigError("generator probabilities must be in [0, 1]");
    }
    if (g.max_attempts < 1) throw ConfigError("generator.max_attempts must be >= 1");
  }
}

ResolvedRun resolve_learner(const LearnerSettings& s, const NetworkedSystem& system,
                            const CostSpec& cost, const Synthesis& syn, int T, double sigma_u) {
  ResolvedRun out;
  const AnalysisConstants c = analysis_constants(system, syn);
  out.constants = c;
  const int n = system.layout.n();
  const int m = system.layout.m();
  const int p = system.layout.nodes();
  const int q = syn.ig.size();
  const int D_max = syn.D.max_finite();
  const double sigma_w = system.sigma_w;

  LearnerConfig& lc = out.learner;
  lc.T = T;
  lc.sigma_u = sigma_u;
  lc.lambda = s.lambda;
  const int theory_h = default_horizon(D_max, c.gamma, T);
  lc.h = s.h ? *s.h : s.h_theory ? theory_h : 4 * D_max + 4;
  if (lc.h < theory_h) {
    out.warnings.push_back("h = " + std::to_string(lc.h) + " is below the theoretical horizon " +
                           std::to_string(theory_h));
  }
  const int psi = static_cast<int>(scc_partition(system.graph).size());
  const ExplorationRecommendation rec = recommend_exploration_length(
      c, n, m, p, q, lc.h, sigma_w, sigma_u, s.lambda, T, psi);
  if (s.N) {
    lc.N = *s.N;
  } else if (s.N_theory) {
    if (!std::isfinite(rec.N) || rec.N > 1e9) throw ConfigError("theoretical N is not representable");
    lc.N = static_cast<int>(std::ceil(rec.N));
  } else {
    lc.N = static_cast<int>(std::ceil(std::sqrt(double(T))));
  }

  // A practical N sits on the sqrt(T) branch, whose radius is epsilon_T; the
  // formula's epsilon_bar presumes the theoretical N.
  const double eps = s.N_theory ? rec.epsilon_bar : rec.epsilon_T;
  const SafetyRadii radii = default_safety_radii(c, n, m, p, q, sigma_w, sigma_u, lc.h, T, eps);
  lc.R_x = finite_or_unbounded(s.R_x.value_or(radii.R_x));
  lc.R_u = finite_or_unbounded(s.R_u.value_or(radii.R_u));
  lc.vartheta = finite_or_unbounded(s.vartheta.value_or(radii.vartheta));
  lc.radius = finite_or_unbounded(s.radius.value_or(class_radius(c, n, p)));
  lc.alpha = s.alpha.value_or(default_alpha(cost, sigma_w));
  if (!(lc.alpha > 0.0)) {
    out.warnings.push_back("default alpha is zero; using 1");
    lc.alpha = 1.0;
  }
  return out;
}

ReplicationSeeds replication_seeds(std::uint64_t master, int T, int rep) {
  ReplicationSeeds s;
  s.system = derive_seed(master, 0, static_cast<std::uint64_t>(rep));
  s.streams.noise_seed = derive_seed(master, 1, static_cast<std::uint64_t>(T),
                                     static_cast<std::uint64_t>(rep));
  s.streams.input_seed = derive_seed(master, 2, static_cast<std::uint64_t>(T),
                                     static_cast<std::uint64_t>(rep));
  return s;
}

GeneratedSystem replication_system(const ExperimentConfig& config, int rep) {
  if (config.system_file) {
    const Json j = read_json_file(*config.system_file);
    NetworkedSystem sys = system_from_json(j);
    if (config.sigma_w) sys.sigma_w = *config.sigma_w;
    CostSpec cost = cost_from_json(j, sys.layout);
    return {std::move(sys), std::move(cost)};
  }
  Rng rng(replication_seeds(config.seed, 0, rep).system);
  return generate_system(config.generator, config.sigma_w.value_or(1.0), rng);
}

namespace {

double sum_first(const std::vector<double>& v, int T) {
  return std::accumulate(v.begin(), v.begin() + std::min<std::size_t>(T, v.size()), 0.0);
}

}  // namespace

ResultRow run_replication(const ExperimentConfig& config, int T, int rep) {
  ResultRow row;
  row.T = T;
  row.replication = rep;
  const ReplicationSeeds seeds = replication_seeds(config.seed, T, rep);
  row.seed = seeds.streams.noise_seed;
  try {
    const GeneratedSystem gs = replication_system(config, rep);
    const Synthesis syn = synthesize(gs.system, gs.cost);
    row.j_star = syn.J_star;
    const ResolvedRun rr = resolve_learner(config.learner, gs.system, gs.cost, syn, T,
                                           config.sigma_u);
    const RunTrace trace = run_online_control(gs.system, gs.cost, syn, rr.learner, seeds.streams);
    row.learned_cost = sum_first(trace.cost, T);
    row.regret = regret(trace, syn.J_star).total;
    row.phi_error = trace.phi_error;
    row.fallback = trace.fallback.empty() ? 0 : trace.fallback.back();
    if (config.audit) {
      row.audit = decentralized_audit(trace, gs.system.layout, gs.cost, syn).passed() ? "pass"
                                                                                       : "fail";
    }
    if (config.baselines) {
      row.has_baselines = true;
      row.optimal_cost =
          sum_first(simulate_optimal(gs.system, gs.cost, syn, T, seeds.streams.noise_seed), T);
      row.zero_cost = sum_first(simulate_zero_input(gs.system, gs.cost, T, seeds.streams.noise_seed), T);
    }
    if (config.traces) {
      const std::string stem =
          config.out_dir + "/trace_" + std::to_string(T) + "_" + std::to_string(rep);
      std::ostringstream csv;
      write_trace_csv(csv, trace);
      write_text_file(stem + ".csv", csv.str());
      Json side = trace_sidecar(trace);
      side["system"] = system_to_json(gs.system, gs.cost);
      write_text_file(stem + ".json", side.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  return row;
}

ResultTable run_experiment(const ExperimentConfig& config, bool serial) {
  validate_config(config);
  if (config.traces) std::filesystem::create_directories(config.out_dir);
  const auto tasks = make_tasks(config.T, config.replications);
  const ReplicationJob<ResultRow> job = [&config](const ReplicationTask& t) {
    return run_replication(config, t.T, t.rep);
  };
  ResultTable table;
  table.rows = serial ? run_replications_serial(tasks, job)
                      : run_replications(tasks, job, config.workers);
  summarize(table);
  return table;
}

ResultTable compare_baselines(const ExperimentConfig& config, bool serial) {
  ExperimentConfig c = config;
  c.baselines = true;
  return run_experiment(c, serial);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
  const std::size_t k = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

void summarize(ResultTable& table) {
  table.per_T.clear();
  table.slope.reset();
  std::vector<int> Ts;
  for (const ResultRow& r : table.rows) {
    if (std::find(Ts.begin(), Ts.end(), r.T) == Ts.end()) Ts.push_back(r.T);
  }
  for (int T : Ts) {
    TSummary s;
    s.T = T;
    std::vector<double> regrets;
    for (const ResultRow& r : table.rows) {
      if (r.T != T || r.status != "ok") continue;
      regrets.push_back(r.regret);
      s.mean_optimal_regret += r.optimal_cost - T * r.j_star;
      s.mean_zero_regret += r.zero_cost - T * r.j_star;
    }
    s.ok = static_cast<int>(regrets.size());
    if (s.ok > 0) {
      s.mean_regret = std::accumulate(regrets.begin(), regrets.end(), 0.0) / s.ok;
      s.mean_optimal_regret /= s.ok;
      s.mean_zero_regret /= s.ok;
      std::sort(regrets.begin(), regrets.end());
      s.median_regret = s.ok % 2 ? regrets[s.ok / 2]
                                 : 0.5 * (regrets[s.ok / 2 - 1] + regrets[s.ok / 2]);
    }
    table.per_T.push_back(s);
  }
  if (table.per_T.size() >= 3) {
    std::vector<double> x, y;
    for (const TSummary& s : table.per_T) {
      if (s.ok == 0 || !(s.mean_regret > 0.0)) return;
      x.push_back(s.T);
      y.push_back(s.mean_regret);
    }
    table.slope = loglog_slope(x, y);
  }
}

std::string results_csv(const ResultTable& table) {
  std::ostringstream os;
  os << "T,replication,seed,regret,phi_error,audit,j_star,learned_cost,optimal_cost,zero_cost,"
        "fallback,status\n";
  for (const ResultRow& r : table.rows) {
    const bool ok = r.status == "ok";
    const auto num = [&](double v) { return ok ? format_double(v) : std::string(); };
    os << r.T << ',' << r.replication << ',' << r.seed << ',' << num(r.regret) << ','
       << num(r.phi_error) << ',' << (ok ? r.audit : "") << ',' << num(r.j_star) << ','
       << num(r.learned_cost) << ',' << (ok && r.has_baselines ? format_double(r.optimal_cost) : "")
       << ',' << (ok && r.has_baselines ? format_double(r.zero_cost) : "") << ','
       << (ok ? std::to_string(r.fallback) : "") << ',' << csv_field(r.status) << '\n';
  }
  return os.str();
}

Json summary_json(const ResultTable& table) {
  Json per = Json::array();
  for (const TSummary& s : table.per_T) {
    per.push_back({{"T", s.T},
                   {"ok", s.ok},
                   {"mean_regret", s.mean_regret},
                   {"median_regret", s.median_regret},
                   {"mean_optimal_regret", s.mean_optimal_regret},
                   {"mean_zero_input_regret", s.mean_zero_regret}});
  }
  Json j;
  j["per_T"] = per;
  j["rows"] = table.rows.size();
  j["failed"] = std::count_if(table.rows.begin(), table.rows.end(),
                              [](const ResultRow& r) { return r.status != "ok"; });
  j["audit_failures"] = std::count_if(table.rows.begin(), table.rows.end(),
                                      [](const ResultRow& r) { return r.audit == "fail"; });
  j["loglog_slope"] = table.slope ? Json(*table.slope) : Json(nullptr);
  return j;
}

void write_outputs(const ExperimentConfig& config, const ResultTable& table) {
  std::filesystem::create_directories(config.out_dir);
  write_text_file(config.out_dir + "/results.csv", results_csv(table));
  write_text_file(config.out_dir + "/summary.json", summary_json(table).dump(2) + "\n");
}

}  // namespace declqr
