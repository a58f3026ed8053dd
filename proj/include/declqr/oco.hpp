#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "declqr/linalg.hpp"

namespace declqr {

struct OcoConfig {
  int tau = 0;
  double alpha = 1.0;
  int T = 0;
  VectorXd x_init;
};

class FeasibleSet {
 public:
  virtual ~FeasibleSet() = default;
  virtual int dimension() const = 0;
  virtual VectorXd project(const VectorXd& x) const = 0;
  virtual bool contains(const VectorXd& x, double tol = 1e-12) const = 0;
  /// Upper bound G on sup ||x - y|| over the set.
  virtual double diameter() const = 0;
};

/// Closed Euclidean ball.
class BallSet final : public FeasibleSet {
 public:
  BallSet(VectorXd center, double radius);
  int dimension() const override { return static_cast<int>(center_.size()); }
  VectorXd project(const VectorXd& x) const override;
  bool contains(const VectorXd& x, double tol = 1e-12) const override;
  double diameter() const override { return 2.0 * radius_; }

 private:
  VectorXd center_;
  double radius_;
};

/// 3 / (alpha t); t = 0 is treated as t = 1.
double oco_step_size(double alpha, int t);

/// Supplies g_index evaluated at x_index.
using GradSource = std::function<VectorXd(int index, const VectorXd& x_index)>;

struct OcoStep {
  int t = 0;
  double eta = 0.0;
  double grad_norm = 0.0;
  const VectorXd* x_next = nullptr;
};
using OcoObserver = std::function<void(const OcoStep&)>;

/// Projected gradient with delayed feedback. Returns x_0, ..., x_{T+tau}:
/// x_0..x_tau equal x_init and step t in [tau, T-1+tau] applies
/// x_{t+1} = Pi(x_t - eta_t g_{t-tau}). Exceptions from `grad` are rethrown as
/// std::runtime_error naming the step.
std::vector<VectorXd> run_oco(const OcoConfig& config, const FeasibleSet& set,
                              const GradSource& grad, const OcoObserver& observer = {});

/// Loss with memory F_t(x_t, ..., x_{t-h}), window ordered newest first.
using MemoryLoss = std::function<double(int t, const std::vector<VectorXd>& window)>;
/// Unary loss f_t(x).
using UnaryLoss = std::function<double(int t, const VectorXd& x)>;

/// sum_{t=first}^{last} F_t(x_t..x_{t-h}) - f_t(x_star).
double regret_of(const std::vector<VectorXd>& iterates, int first, int last, int h,
                 const MemoryLoss& F, const UnaryLoss& f, const VectorXd& x_star);

}  // namespace declqr
