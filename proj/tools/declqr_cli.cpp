// Command-line front end: run, audit, synthesize, gen.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "declqr/audit.hpp"
#include "declqr/harness.hpp"
#include "declqr/io.hpp"

namespace fs = std::filesystem;
using namespace declqr;

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kAudit = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> replications;
  std::optional<int> workers;
  bool quiet = false;
};

ExperimentConfig load_config(const Common& o) {
  ExperimentConfig c;
  if (!o.config.empty()) {
    c = parse_config(read_json_file(o.config));
    if (c.system_file && fs::path(*c.system_file).is_relative()) {
      c.system_file = (fs::path(o.config).parent_path() / *c.system_file).string();
    }
  } else {
    c.T = {2000};
  }
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.replications) c.replications = *o.replications;
  if (o.workers) c.workers = *o.workers;
  validate_config(c);
  return c;
}

int cmd_run(const Common& o) {
  const ExperimentConfig c = load_config(o);
  const ResultTable table = run_experiment(c);
  write_outputs(c, table);
  long failed = 0, audit_failed = 0;
  for (const ResultRow& r : table.rows) {
    if (r.status != "ok") ++failed;
    if (r.audit == "fail") ++audit_failed;
  }
  if (!o.quiet) {
    for (const TSummary& s : table.per_T) {
      std::printf("T=%-7d ok=%-4d mean regret=%.6g  median=%.6g  zero-input=%.6g\n", s.T, s.ok,
                  s.mean_regret, s.median_regret, s.mean_zero_regret);
    }
    if (table.slope) std::printf("log-log slope: %.4f\n", *table.slope);
    std::printf("wrote %s/results.csv (%zu rows, %ld failed)\n", c.out_dir.c_str(),
                table.rows.size(), failed);
  }
  if (audit_failed > 0) return kAudit;
  return failed > 0 ? kRuntime : kOk;
}

int cmd_audit(const std::string& trace_path, const Common& o) {
  std::ifstream csv(trace_path);
  if (!csv) throw ConfigError("cannot open " + trace_path);
  const Json side = read_json_file(fs::path(trace_path).replace_extension(".json").string());
  if (!side.contains("system")) throw ConfigError("trace sidecar has no system");
  const NetworkedSystem sys = system_from_json(side["system"]);
  const CostSpec cost = cost_from_json(side["system"], sys.layout);
  const RunTrace trace = read_trace(csv, side);
  const Synthesis syn = synthesize(sys, cost);
  const AuditReport rep = decentralized_audit(trace, sys.layout, cost, syn);
  if (!o.quiet) {
    std::printf("max input deviation     %.3e\n", rep.max_deviation);
    std::printf("information violations  %ld\n", rep.info_violations);
    std::printf("missing memory lookups  %ld\n", rep.missing_memory);
    std::printf("memory shape mismatches %ld\n", rep.memory_shape_mismatches);
    std::printf("coupling flags          %ld\n", rep.coupling_flags);
    std::printf("max |K1| %zu, max |K2| %zu\n", rep.max_K1, rep.max_K2);
    for (const std::string& m : rep.messages) std::printf("  %s\n", m.c_str());
    std::printf("%s\n", rep.passed() ? "PASS" : "FAIL");
  }
  return rep.passed() ? kOk : kAudit;
}

int cmd_synthesize(const std::string& system_path, const Common& o) {
  const Json j = read_json_file(system_path);
  const NetworkedSystem sys = system_from_json(j);
  const CostSpec cost = cost_from_json(j, sys.layout);
  const ValidationReport vr = validate_system(sys, cost);
  for (const std::string& w : vr.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!vr.ok()) throw ConfigError(vr.errors.front());
  const Synthesis syn = synthesize(sys, cost);
  const AnalysisConstants c = analysis_constants(sys, syn);
  if (o.quiet) {
    std::printf("%.17g\n", syn.J_star);
    return kOk;
  }
  std::cout << export_info_graph(syn.ig) << '\n' << export_gains(syn) << '\n';
  std::printf("J* = %.17g\n", syn.J_star);
  std::printf("Gamma = %.6g  gamma = %.6g  kappa = %.6g  D_max = %d\n", c.Gamma, c.gamma,
              c.kappa, c.D_max);
  return kOk;
}

int cmd_gen(const Common& o, const std::string& out) {
  const ExperimentConfig c = load_config(o);
  Rng rng(derive_seed(c.seed, 0, 0));
  const GeneratedSystem gs = generate_system(c.generator, c.sigma_w.value_or(1.0), rng);
  const std::string text = system_to_json(gs.system, gs.cost).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
    if (!o.quiet) std::printf("wrote %s\n", out.c_str());
  }
  return kOk;
}

void add_common(CLI::App* sub, Common& o, bool sweep) {
  sub->add_option("--config", o.config, "experiment config (JSON)");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_flag("--quiet", o.quiet, "suppress progress output");
  if (sweep) {
    sub->add_option("--out-dir", o.out_dir, "output directory");
    sub->add_option("--replications", o.replications, "replications per T")
        ->check(CLI::PositiveNumber);
    sub->add_option("--workers", o.workers, "OpenMP threads (0 = default)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online learning of decentralized LQR controllers"};
  app.require_subcommand(1);
  Common o;
  std::string trace_path, system_path, gen_out;

  CLI::App* run = app.add_subcommand("run", "run an experiment sweep");
  add_common(run, o, true);
  CLI::App* audit = app.add_subcommand("audit", "replay a saved trace with per-controller evaluators");
  add_common(audit, o, false);
  audit->add_option("--trace", trace_path, "trace CSV (sidecar JSON alongside)")->required();
  CLI::App* syn = app.add_subcommand("synthesize", "print gains, J* and constants for a system");
  add_common(syn, o, false);
  syn->add_option("--system,system", system_path, "system file (JSON)")->required();
  CLI::App* gen = app.add_subcommand("gen", "emit a random system file");
  add_common(gen, o, false);
  gen->add_option("--out", gen_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(o);
    if (*audit) return cmd_audit(trace_path, o);
    if (*syn) return cmd_synthesize(system_path, o);
    if (*gen) return cmd_gen(o, gen_out);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kOk;
}
