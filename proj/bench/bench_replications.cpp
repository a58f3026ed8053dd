// Serial reference runner vs the OpenMP runner on one Monte Carlo sweep.
#include <benchmark/benchmark.h>

#include "declqr/harness.hpp"
#include "declqr/replications.hpp"

using namespace declqr;

namespace {

ExperimentConfig bench_config() {
  ExperimentConfig c;
  c.T = {1000};
  c.replications = 8;
  c.seed = 2024;
  c.learner.alpha = 100.0;
  c.audit = false;
  return c;
}

ReplicationJob<ResultRow> job_for(const ExperimentConfig& c) {
  return [&c](const ReplicationTask& t) { return run_replication(c, t.T, t.rep); };
}

void BM_Serial(benchmark::State& state) {
  const ExperimentConfig c = bench_config();
  const auto tasks = make_tasks(c.T, c.replications);
  const auto job = job_for(c);
  for (auto _ : state) benchmark::DoNotOptimize(run_replications_serial(tasks, job));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(tasks.size()));
}

void BM_OpenMP(benchmark::State& state) {
  const ExperimentConfig c = bench_config();
  const auto tasks = make_tasks(c.T, c.replications);
  const auto job = job_for(c);
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_replications(tasks, job, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(tasks.size()));
  state.counters["threads"] = effective_workers(workers);
}

}  // namespace

BENCHMARK(BM_Serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OpenMP)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
