#pragma once

#include <functional>
#include <vector>

namespace declqr {

/// One Monte Carlo job: a horizon and a replication index.
struct ReplicationTask {
  int T = 0;
  int rep = 0;
};

/// Tasks in canonical (T, rep) order.
std::vector<ReplicationTask> make_tasks(const std::vector<int>& T_values, int replications);

/// Runs `job` on every task and returns the results in task order. `job` must
/// not throw and must not share mutable state between tasks.
template <typename Row>
using ReplicationJob = std::function<Row(const ReplicationTask&)>;

/// OpenMP runner; `workers <= 0` uses the OpenMP default.
template <typename Row>
std::vector<Row> run_replications(const std::vector<ReplicationTask>& tasks,
                                  const ReplicationJob<Row>& job, int workers);

/// Single-threaded reference with the same contract.
template <typename Row>
std::vector<Row> run_replications_serial(const std::vector<ReplicationTask>& tasks,
                                         const ReplicationJob<Row>& job) {
  std::vector<Row> rows;
  rows.reserve(tasks.size());
  for (const ReplicationTask& t : tasks) rows.push_back(job(t));
  return rows;
}

template <typename Row>
std::vector<Row> run_replications(const std::vector<ReplicationTask>& tasks,
                                  const ReplicationJob<Row>& job, int workers) {
  std::vector<Row> rows(tasks.size());
  const long count = static_cast<long>(tasks.size());
  // Each slot is written by exactly one iteration, so the merge is by index.
  if (workers > 0) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long k = 0; k < count; ++k) rows[k] = job(tasks[k]);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < count; ++k) rows[k] = job(tasks[k]);
  }
  return rows;
}

/// Number of threads an OpenMP region would use with `workers`.
int effective_workers(int workers);

}  // namespace declqr
