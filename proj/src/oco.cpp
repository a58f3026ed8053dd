#include "declqr/oco.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace declqr {

BallSet::BallSet(VectorXd center, double radius) : center_(std::move(center)), radius_(radius) {
  if (!(radius_ > 0.0)) throw std::invalid_argument("ball radius must be positive");
}

VectorXd BallSet::project(const VectorXd& x) const {
  const VectorXd d = x - center_;
  const double nrm = d.norm();
  if (nrm <= radius_) return x;
  return center_ + (radius_ / nrm) * d;
}

bool BallSet::contains(const VectorXd& x, double tol) const {
  return (x - center_).norm() <= radius_ * (1.0 + tol);
}

double oco_step_size(double alpha, int t) { return 3.0 / (alpha * std::max(t, 1)); }

std::vector<VectorXd> run_oco(const OcoConfig& config, const FeasibleSet& set,
                              const GradSource& grad, const OcoObserver& observer) {
  if (config.tau < 0 || config.T < 0) throw std::invalid_argument("run_oco: negative tau or T");
  if (!(config.alpha > 0.0)) throw std::invalid_argument("run_oco: alpha must be positive");
  if (!set.contains(config.x_init)) throw std::invalid_argument("run_oco: x_init not feasible");
  const int tau = config.tau;
  std::vector<VectorXd> x;
  x.reserve(static_cast<std::size_t>(config.T + tau + 1));
  for (int t = 0; t <= tau; ++t) x.push_back(config.x_init);
  for (int t = tau; t <= config.T - 1 + tau; ++t) {
    VectorXd g;
    try {
      g = grad(t - tau, x[t - tau]);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_oco: gradient callback failed at step " +
                               std::to_string(t) + ": " + e.what());
    }
    const double eta = oco_step_size(config.alpha, t);
    x.push_back(set.project(x[t] - eta * g));
    if (observer) observer(OcoStep{t, eta, g.norm(), &x.back()});
  }
  return x;
}

double regret_of(const std::vector<VectorXd>& iterates, int first, int last, int h,
                 const MemoryLoss& F, const UnaryLoss& f, const VectorXd& x_star) {
  double total = 0.0;
  std::vector<VectorXd> window(h + 1);
  for (int t = first; t <= last; ++t) {
    for (int k = 0; k <= h; ++k) window[k] = iterates.at(std::max(t - k, 0));
    total += F(t, window) - f(t, x_star);
  }
  return total;
}

}  // namespace declqr
