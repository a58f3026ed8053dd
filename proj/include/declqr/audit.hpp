#pragma once

#include <optional>
#include <string>
#include <vector>

#include "declqr/learner.hpp"

namespace declqr {

/// Makes controller `controller` read a state one step before it may, at `time`.
struct InjectedFault {
  int controller = 0;
  int time = 0;
};

struct AuditOptions {
  std::optional<InjectedFault> fault;
  double tolerance = 1e-9;
  int max_messages = 20;
  bool record_inputs = false;
};

struct AuditReport {
  double max_deviation = 0.0;         // max |u_local - u_trace|
  double max_scaled_deviation = 0.0;  // same, divided by max(1, |u_trace|)
  long info_violations = 0;         // state reads outside the controller's information set
  long missing_memory = 0;          // lookups absent from K1 / K2
  long memory_shape_mismatches = 0; // K1 / K2 index sets differing from their closed forms
  long coupling_flags = 0;          // estimates or costs coupling a controller's component to others
  std::size_t max_K1 = 0;
  std::size_t max_K2 = 0;
  std::vector<std::string> messages;
  /// Locally computed u_t for t = N + D_max, ..., with record_inputs.
  std::vector<VectorXd> inputs;

  long violations() const {
    return info_violations + missing_memory + memory_shape_mismatches + coupling_flags;
  }
  bool passed(double tolerance = 1e-9) const {
    // Scaled, so runs that diverged into the safety fallback are not failed
    // on rounding alone.
    return violations() == 0 && max_scaled_deviation <= tolerance;
  }
};

/// Replays the control phase of `trace` with one isolated evaluator per
/// controller. Each evaluator reads plant states only through an accessor that
/// enforces the information set, keeps its own K1 (disturbance estimates) and
/// K2 (DFC parameters) windows, reconstructs neighbour inputs from them, and
/// performs its own projected-gradient updates for the nodes of its trees.
AuditReport decentralized_audit(const RunTrace& trace, const BlockLayout& layout,
                                const CostSpec& cost, const Synthesis& syn,
                                const AuditOptions& options = {});

}  // namespace declqr
