#include "declqr/replications.hpp"

#include <omp.h>

#include <algorithm>

namespace declqr {

std::vector<ReplicationTask> make_tasks(const std::vector<int>& T_values, int replications) {
  std::vector<ReplicationTask> tasks;
  tasks.reserve(T_values.size() * static_cast<std::size_t>(std::max(replications, 0)));
  for (int T : T_values) {
    for (int r = 0; r < replications; ++r) tasks.push_back({T, r});
  }
  return tasks;
}

int effective_workers(int workers) {
  return workers > 0 ? workers : omp_get_max_threads();
}

}  // namespace declqr
