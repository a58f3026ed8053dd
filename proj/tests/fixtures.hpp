#pragma once

#include <Eigen/Dense>

#include "declqr/harness.hpp"

namespace declqr::testing {

// Example-1 graph, zero-based: 1->2 (1), 2->1 (0), 2->3 (1), 3->2 (1), 1->3 (1).
inline CommGraph example1_graph() {
  return CommGraph(3, {{0, 1, 1}, {1, 0, 0}, {1, 2, 1}, {2, 1, 1}, {0, 2, 1}});
}

inline GeneratedSystem example1(std::uint64_t seed, double rho = 0.6) {
  Rng rng(seed);
  GeneratorSpec spec;
  spec.rho_A = rho;
  return generate_system(spec, 1.0, rng);
}

inline NetworkedSystem scalar_system(double a, double b, double sigma_w = 1.0) {
  return NetworkedSystem(CommGraph(1, {}), BlockLayout({1}, {1}), Eigen::MatrixXd::Constant(1, 1, a),
                         Eigen::MatrixXd::Constant(1, 1, b), sigma_w);
}

inline CostSpec identity_cost(int n, int m) {
  return {Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(m, m)};
}

}  // namespace declqr::testing
