#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "clfsyn/dynamics.hpp"

namespace clfsyn {

using FeedbackFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Classical RK4 step with the input held constant over the step.
Eigen::VectorXd rk4_step(const ControlAffineSystem& sys, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double h);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;  // one fewer than states
  std::vector<double> values;           // V along the run (empty without V)
  bool exited = false;
  bool converged = false;
};

struct SimulateOptions {
  double h = 0.01;
  std::optional<double> target_radius;
  std::optional<SemialgebraicSet> safe_set;
  std::optional<Polynomial> V;
  double membership_tol = 1e-9;
};

/// Raised when the feedback law throws; carries the trajectory so far.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

/// Integrates x' = f(x, law(x)) until t_end, an exit from the safe set or
/// entry into the target ball.
Trajectory simulate(const ControlAffineSystem& sys, const FeedbackFn& law, const Eigen::VectorXd& x0,
                    double t_end, const SimulateOptions& opts = {});

/// 0.95 times the smallest V found where rays from the origin leave S and
/// S_box. Rays: +-e_i plus `samples` random directions from `seed`.
double beta_star(const Polynomial& V, const ProblemInstance& problem, int samples = 2000,
                 unsigned seed = 1);

}  // namespace clfsyn
